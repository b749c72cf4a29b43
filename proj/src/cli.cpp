#include "relscope/cli.hpp"

#include "relscope/ablation.hpp"
#include "relscope/config.hpp"
#include "relscope/features.hpp"
#include "relscope/influence.hpp"
#include "relscope/model_io.hpp"
#include "relscope/parallel.hpp"
#include "relscope/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <unistd.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

namespace relscope {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out, data, features, model, matrix, image, label;
  std::optional<int> workers, layer, step, per_relation;
  std::optional<double> fraction, threshold;
  std::optional<std::string> mask_size, mask_color;
};

RunConfig resolve_config(const Options& o, std::string_view command) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.workers) c.workers = *o.workers;
  if (o.layer) c.ablation.layer = *o.layer;
  if (o.fraction) c.ablation.fraction = *o.fraction;
  if (o.threshold) c.occlusion.threshold = *o.threshold;
  if (o.step) c.occlusion.scan.step = *o.step;
  if (o.per_relation) c.occlusion.per_relation = *o.per_relation;
  if (o.mask_size) {
    const auto [w, h] = parse_mask_size(*o.mask_size);
    c.occlusion.scan.mask_width = w;
    c.occlusion.scan.mask_height = h;
  }
  if (o.mask_color) c.occlusion.scan.mask_color = parse_color(*o.mask_color);
  if (o.data) c.paths.data = *o.data;
  if (o.features) c.paths.features = *o.features;
  if (o.model) c.paths.model = *o.model;
  c.resolve();
  try {
    c.validate(command);
  } catch (const UnsupportedConfiguration& e) {
    throw UsageError(e.what());
  }
  return c;
}

void echo_config(const RunConfig& c, const fs::path& dir) {
  write_file_atomic(dir / "config.resolved.ini", config_to_ini(c));
}

fs::path out_dir(const Options& o, const RunConfig& c) { return o.out ? fs::path(*o.out) : fs::path(c.paths.out); }

json extractor_json(const ExtractorSpec& s) {
  json plan = json::array();
  for (const auto& st : s.plan) plan.push_back({st.out_channels, st.kernel, st.conv_stride, st.pool});
  return {{"kind", extractor_kind_name(s.kind)}, {"seed", s.seed}, {"input_size", s.input_size},
          {"plan", plan}, {"grid", {s.grid_cols, s.grid_rows}}, {"output_dim", s.output_dim}};
}

std::string fmt(double v, const char* f = "%.4f") {
  if (std::isnan(v)) return "";
  char buf[48];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string text_of(const fs::path& p) {
  const auto bytes = read_file(p);
  return std::string(bytes.begin(), bytes.end());
}

std::string file_stem(const std::string& file) {
  std::string s = fs::path(file).replace_extension().string();
  std::replace(s.begin(), s.end(), '/', '_');
  return s;
}

Model load_checked_model(const RunConfig& c, bool need_extractor_match) {
  const StoredModel stored = load_model(c.paths.model);
  if (need_extractor_match) {
    const json meta = json::parse(stored.metadata_json, nullptr, false);
    if (meta.is_object() && meta.contains("extractor") && meta["extractor"] != extractor_json(c.extractor))
      throw DataError("model " + c.paths.model + " was trained on a different extractor than the config describes");
  }
  return stored.model;
}

FeatureSet analysis_set(const RunConfig& c, const Model& model) {
  FeatureSet set = load_feature_file(fs::path(c.paths.features) / "train.rscf");
  if (c.ablation.correct_only) set = set.subset(correctly_classified(model, set));
  if (set.size() == 0) throw DataError("no correctly classified training samples to analyse");
  return set;
}

// ---- subcommands -------------------------------------------------------------

int cmd_gen_data(const Options& o, std::ostream& out) {
  RunConfig c = resolve_config(o, "gen-data");
  const fs::path root = o.out ? fs::path(*o.out) : fs::path(c.paths.data);
  const DatasetManifest m = generate_dataset(c.data, c.seed, root, c.workers);
  echo_config(c, root);
  out << "gen-data: " << m.train.size() << " train, " << m.test.size() << " test images -> " << root.string() << "\n";
  return kExitOk;
}

int cmd_extract(const Options& o, std::ostream& out) {
  RunConfig c = resolve_config(o, "extract");
  const fs::path root = c.paths.data;
  const DatasetManifest m = load_manifest(root);
  const auto extractor = build_extractor(c.extractor);
  const fs::path dir = o.out ? fs::path(*o.out) : fs::path(c.paths.features);
  for (const auto& [name, entries] : {std::pair{"train", &m.train}, std::pair{"test", &m.test}}) {
    FeatureSet set;
    set.source = std::string(extractor_kind_name(c.extractor.kind));
    set.vectors.resize(static_cast<Index>(entries->size()), extractor->output_dim());
    std::vector<int> labels;
    for (const auto& e : *entries) labels.push_back(relation_index(e.label));
    set.labels = one_hot(labels, kNumRelations);
    parallel_for(entries->size(), c.workers, [&](std::size_t i) {
      const RgbImage img = read_png_rgb(root / (*entries)[i].file);
      set.vectors.row(static_cast<Index>(i)) = extractor->extract(img).transpose();
    });
    write_feature_file(set, dir / (std::string(name) + ".rscf"));
    out << "extract: " << name << " " << set.size() << " x " << set.dim() << " -> "
        << (dir / (std::string(name) + ".rscf")).string() << "\n";
  }
  write_file_atomic(dir / "extractor.json", extractor_json(c.extractor).dump(1) + "\n");
  echo_config(c, dir);
  return kExitOk;
}

int cmd_train(const Options& o, std::ostream& out) {
  RunConfig c = resolve_config(o, "train");
  const FeatureSet data = load_feature_file(fs::path(c.paths.features) / "train.rscf");
  const Model init = Model::initialized(data.dim(), c.train.hidden, data.num_classes(), c.seed);
  const TrainResult<float> result = train(init, data, c.train);
  const fs::path model_path = o.out ? fs::path(*o.out) / "model.rscm" : fs::path(c.paths.model);
  json meta = json::parse(training_metadata(c.train, result.log));
  meta["extractor"] = extractor_json(c.extractor);
  save_model(result.model, model_path, meta.dump());
  std::string log = "epoch,loss,accuracy\n";
  for (const auto& e : result.log) log += std::to_string(e.epoch) + "," + fmt(e.loss, "%.17g") + "," + fmt(e.accuracy, "%.17g") + "\n";
  const fs::path dir = model_path.parent_path().empty() ? fs::path(".") : model_path.parent_path();
  write_file_atomic(dir / "train_log.csv", log);
  c.paths.model = model_path.string();
  echo_config(c, dir);
  out << "train: " << result.log.size() << " epochs, final loss " << fmt(result.log.empty() ? 0.0 : result.log.back().loss, "%.6g")
      << " -> " << model_path.string() << "\n";
  return kExitOk;
}

int cmd_eval(const Options& o, std::ostream& out) {
  RunConfig c = resolve_config(o, "eval");
  const Model model = load_model(c.paths.model).model;
  const fs::path dir = out_dir(o, c);
  json j = json::object();
  std::string csv = "split,n,overall";
  for (int r = 0; r < kNumRelations; ++r) csv += "," + class_name(r);
  csv += "\n";
  int found = 0;
  for (const char* split : {"train", "test"}) {
    const fs::path p = fs::path(c.paths.features) / (std::string(split) + ".rscf");
    if (!fs::exists(p)) continue;
    ++found;
    const EvalResult r = evaluate(model, load_feature_file(p));
    json cls = json::object();
    csv += std::string(split) + "," + std::to_string(r.predictions.size()) + "," + fmt(r.accuracy);
    for (size_t k = 0; k < r.class_accuracy.size(); ++k) {
      cls[class_name(static_cast<int>(k))] = std::isnan(r.class_accuracy[k]) ? json(nullptr) : json(r.class_accuracy[k]);
      csv += "," + fmt(r.class_accuracy[k]);
    }
    csv += "\n";
    j[split] = {{"n", r.predictions.size()}, {"accuracy", r.accuracy}, {"class_accuracy", cls},
                {"class_counts", r.class_counts}};
    out << "eval: " << split << " accuracy " << fmt(r.accuracy) << "\n";
  }
  if (!found) throw IoError("no feature files (train.rscf, test.rscf) under " + c.paths.features);
  write_file_atomic(dir / "eval.json", j.dump(1) + "\n");
  write_file_atomic(dir / "eval.csv", csv);
  echo_config(c, dir);
  return kExitOk;
}

struct ScanJob {
  std::string file;
  int label = 0;
  std::uint64_t index = 0;  // position in the split, seeds the permutation draws
  bool has_masks = true;
};

int cmd_occlude(const Options& o, std::ostream& out) {
  RunConfig c = resolve_config(o, "occlude");
  const Model model = load_checked_model(c, true);
  const auto extractor = build_extractor(c.extractor);
  if (extractor->output_dim() != model.input_dim())
    throw DimensionError("extractor output " + std::to_string(extractor->output_dim()) + " does not match model input " +
                         std::to_string(model.input_dim()));
  const fs::path dir = out_dir(o, c) / "occlusion";
  fs::path root = c.paths.data;

  std::vector<ScanJob> jobs;
  std::array<int, kNumRelations> found{};
  if (o.image) {
    if (!o.label) throw UsageError("--image needs --label");
    root = fs::path(*o.image).parent_path();
    const std::string file = fs::path(*o.image).filename().string();
    const bool masks = fs::exists(root / mask_file(file, 'a')) && fs::exists(root / mask_file(file, 'b'));
    if (!fs::exists(*o.image)) throw IoError("image not found: " + *o.image);
    const auto rel = parse_relation(*o.label);
    if (!rel) throw UsageError("unknown relation '" + *o.label + "'");
    jobs.push_back({file, relation_index(*rel), 0, masks});
  } else {
    const DatasetManifest m = load_manifest(root);
    const auto& entries = c.occlusion.split == "train" ? m.train : m.test;
    std::array<std::vector<ScanJob>, kNumRelations> chosen;
    for (size_t i = 0; i < entries.size(); ++i) {
      const int rel = relation_index(entries[i].label);
      if (static_cast<int>(chosen[static_cast<size_t>(rel)].size()) >= c.occlusion.per_relation) continue;
      const RgbImage img = read_png_rgb(root / entries[i].file);
      const auto pass = forward(model, extractor->extract(img).transpose());
      if (argmax(pass.probabilities.row(0)) == rel) chosen[static_cast<size_t>(rel)].push_back({entries[i].file, rel, i, true});
      if (std::all_of(chosen.begin(), chosen.end(),
                      [&](const auto& v) { return static_cast<int>(v.size()) >= c.occlusion.per_relation; }))
        break;
    }
    for (int r = 0; r < kNumRelations; ++r) {
      found[static_cast<size_t>(r)] = static_cast<int>(chosen[static_cast<size_t>(r)].size());
      jobs.insert(jobs.end(), chosen[static_cast<size_t>(r)].begin(), chosen[static_cast<size_t>(r)].end());
    }
  }

  std::string loc = "file,relation,baseline_ce,max_E,important_region,contrast,perm_q95,contrast_positive,above_q95\n";
  std::array<int, kNumRelations> positive{}, above{}, scanned{};
  for (const ScanJob& job : jobs) {
    const RgbImage img = read_png_rgb(root / job.file);
    const InfluenceMap map = occlusion_scan(img, *extractor, model, job.label, c.occlusion.scan, c.workers);
    const RegionSet regions = important_regions(map, c.occlusion.threshold);
    const std::string stem = file_stem(job.file);
    write_file_atomic(dir / (stem + ".csv"), influence_csv(map));
    write_file_atomic(dir / (stem + ".json"), scan_summary_json(map, regions));
    const auto png = encode_png(render_heatmap(map, img, {0.5, c.occlusion.smooth, 24}));
    write_file_atomic(dir / (stem + ".png"), std::span<const std::uint8_t>(png));
    loc += job.file + "," + class_name(job.label) + "," + fmt(map.baseline_ce, "%.17g") + "," +
           fmt(map.max_influence(), "%.17g") + "," + std::to_string(regions.important);
    if (job.has_masks) {
      const Mask ma = read_png_mask(root / mask_file(job.file, 'a'));
      const Mask mb = read_png_mask(root / mask_file(job.file, 'b'));
      const auto flagged = relation_cells(map, ma, mb);
      std::vector<double> values;
      for (const auto& r : map.records) values.push_back(r.influence);
      const double contrast = localization_contrast(values, flagged);
      const double q95 = permutation_quantile(values, flagged, c.occlusion.shuffles, 0.95,
                                              derive_seed(c.seed, "permutation", job.index));
      const bool pos = contrast > 0.0, hi = contrast > q95;
      positive[static_cast<size_t>(job.label)] += pos;
      above[static_cast<size_t>(job.label)] += hi;
      ++scanned[static_cast<size_t>(job.label)];
      loc += "," + fmt(contrast, "%.17g") + "," + fmt(q95, "%.17g") + "," + (pos ? "1" : "0") + "," + (hi ? "1" : "0");
    } else {
      loc += ",,,,";
    }
    loc += "\n";
  }
  write_file_atomic(dir / "localization.csv", loc);

  json summary = json::object();
  summary["split"] = o.image ? "single" : c.occlusion.split;
  summary["grid_regions"] = occlusion_grid(c.data.canvas.width, c.data.canvas.height, c.occlusion.scan).size();
  json rels = json::object();
  int tot_scanned = 0, tot_pos = 0, tot_above = 0;
  for (int r = 0; r < kNumRelations; ++r) {
    const auto k = static_cast<size_t>(r);
    tot_scanned += scanned[k];
    tot_pos += positive[k];
    tot_above += above[k];
    rels[class_name(r)] = {{"requested", o.image ? 0 : c.occlusion.per_relation},
                           {"found", o.image ? scanned[k] : found[k]},
                           {"scanned_with_masks", scanned[k]},
                           {"contrast_positive", positive[k]},
                           {"above_q95", above[k]}};
  }
  summary["relations"] = rels;
  if (tot_scanned) {
    summary["fraction_contrast_positive"] = static_cast<double>(tot_pos) / tot_scanned;
    summary["fraction_above_q95"] = static_cast<double>(tot_above) / tot_scanned;
  }
  write_file_atomic(dir / "summary.json", summary.dump(1) + "\n");
  echo_config(c, dir);
  out << "occlude: " << jobs.size() << " images scanned -> " << dir.string() << "\n";
  return kExitOk;
}

int cmd_node_scan(const Options& o, std::ostream& out) {
  RunConfig c = resolve_config(o, "node-scan");
  const Model model = load_model(c.paths.model).model;
  const FeatureSet set = analysis_set(c, model);
  const NodeInfluenceMatrix m = node_scan(model, set, c.ablation.layer, c.workers);
  const fs::path dir = out_dir(o, c) / "node_scan";
  const std::string base = "fc" + std::to_string(c.ablation.layer);
  write_file_atomic(dir / (base + "_matrix.csv"), node_matrix_csv(m));
  write_file_atomic(dir / (base + "_summary.json"), node_matrix_summary_json(m, c.ablation.fraction));
  echo_config(c, dir);
  out << "node-scan: FC-" << c.ablation.layer << " " << m.nodes() << " x " << m.classes() << " over " << set.size()
      << " samples -> " << (dir / (base + "_matrix.csv")).string() << "\n";
  return kExitOk;
}

int cmd_group_ablate(const Options& o, std::ostream& out) {
  RunConfig c = resolve_config(o, "group-ablate");
  const Model model = load_model(c.paths.model).model;
  const fs::path base_dir = out_dir(o, c);
  const std::string base = "fc" + std::to_string(c.ablation.layer);
  const fs::path matrix_path = o.matrix ? fs::path(*o.matrix) : base_dir / "node_scan" / (base + "_matrix.csv");
  if (!fs::exists(matrix_path)) throw IoError("node matrix not found: " + matrix_path.string());
  const NodeInfluenceMatrix m = node_matrix_from_csv(text_of(matrix_path), c.ablation.layer);
  if (c.ablation.layer >= model.num_hidden() || m.nodes() != model.hidden_size(c.ablation.layer))
    throw DimensionError("node matrix " + matrix_path.string() + " does not match layer FC-" +
                         std::to_string(c.ablation.layer) + " of the model");
  const FeatureSet set = analysis_set(c, model);
  const auto groups = select_groups(m, c.ablation.fraction);
  const GroupAblationReport report = group_ablation(model, set, c.ablation.layer, groups);
  const fs::path dir = base_dir / "ablation";
  const std::string table = accuracy_table_csv(report);
  write_file_atomic(dir / (base + "_accuracy.csv"), table);
  write_file_atomic(dir / (base + "_decomposition.csv"), cost_decomposition_csv(report));
  json g = json::array();
  for (const auto& grp : groups) g.push_back({{"relation", class_name(grp.relation)}, {"nodes", grp.nodes}});
  write_file_atomic(dir / (base + "_groups.json"),
                    json{{"layer", c.ablation.layer}, {"fraction", c.ablation.fraction}, {"groups", g}}.dump(1) + "\n");
  echo_config(c, dir);
  out << table;
  return kExitOk;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text_of(p));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

std::string html_escape(const std::string& s) {
  std::string o;
  for (char ch : s) {
    switch (ch) {
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '&': o += "&amp;"; break;
      case '"': o += "&quot;"; break;
      default: o += ch;
    }
  }
  return o;
}

std::string html_table(const std::vector<std::vector<std::string>>& rows) {
  std::string h = "<table>\n";
  for (size_t i = 0; i < rows.size(); ++i) {
    h += "<tr>";
    for (const auto& cell : rows[i]) h += (i ? "<td>" : "<th>") + html_escape(cell) + (i ? "</td>" : "</th>");
    h += "</tr>\n";
  }
  return h + "</table>\n";
}

int cmd_report(const Options& o, std::ostream& out) {
  RunConfig c = resolve_config(o, "report");
  const fs::path base = out_dir(o, c);
  std::string tables = "table,row,column,value\n";
  std::string html =
      "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>relscope report</title>\n"
      "<style>body{font-family:sans-serif}table{border-collapse:collapse;margin:8px 0}"
      "td,th{border:1px solid #999;padding:2px 6px}figure{display:inline-block;margin:4px}"
      "figcaption{font-size:12px}</style></head><body>\n<h1>relscope report</h1>\n";
  bool any = false;
  auto add_long = [&](const std::string& name, const std::vector<std::vector<std::string>>& rows, size_t key_cols) {
    for (size_t i = 1; i < rows.size(); ++i) {
      std::string key;
      for (size_t k = 0; k < key_cols && k < rows[i].size(); ++k) key += (k ? " " : "") + rows[i][k];
      for (size_t j = key_cols; j < rows[i].size() && j < rows[0].size(); ++j)
        tables += name + "," + key + "," + rows[0][j] + "," + rows[i][j] + "\n";
    }
  };

  if (fs::exists(base / "eval.csv")) {
    const auto rows = read_csv(base / "eval.csv");
    add_long("accuracy", rows, 1);
    html += "<h2>Accuracy</h2>\n" + html_table(rows);
    any = true;
  }
  const fs::path abl = base / "ablation";
  if (fs::exists(abl)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(abl)) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      const std::string name = f.filename().string();
      if (name.size() > 13 && name.ends_with("_accuracy.csv")) {
        const std::string layer = name.substr(0, name.size() - 13);
        const auto rows = read_csv(f);
        add_long("ablation_" + layer, rows, 2);
        html += "<h2>Class-wise accuracy with node groups zeroed (" + html_escape(layer) + ")</h2>\n" + html_table(rows);
        any = true;
      } else if (name.size() > 18 && name.ends_with("_decomposition.csv")) {
        const std::string layer = name.substr(0, name.size() - 18);
        const auto rows = read_csv(f);
        add_long("cost_" + layer, rows, 3);
        html += "<h2>Cost difference per group (" + html_escape(layer) + ")</h2>\n" + html_table(rows);
        any = true;
      }
    }
  }
  const fs::path occ = base / "occlusion" / "localization.csv";
  if (fs::exists(occ)) {
    const auto rows = read_csv(occ);
    html += "<h2>Occlusion heatmaps</h2>\n";
    for (size_t i = 1; i < rows.size(); ++i) {
      const std::string stem = file_stem(rows[i][0]);
      html += "<figure><img src=\"../occlusion/" + html_escape(stem) + ".png\" width=\"224\"><figcaption>" +
              html_escape(rows[i][1]) + " &middot; " + html_escape(rows[i][0]);
      if (rows[i].size() > 5 && !rows[i][5].empty()) html += " &middot; contrast " + html_escape(fmt(std::stod(rows[i][5]), "%.3g"));
      html += "</figcaption></figure>\n";
    }
    any = true;
  }
  if (!any) throw DataError("nothing to report under " + base.string());
  html += "</body></html>\n";
  write_file_atomic(base / "report" / "tables.csv", tables);
  write_file_atomic(base / "report" / "index.html", html);
  out << "report: " << (base / "report").string() << "\n";
  return kExitOk;
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "INI config file");
  sub->add_option("--seed", o.seed, "root seed");
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--workers", o.workers, "worker threads");
  sub->add_option("--data", o.data, "dataset root");
  sub->add_option("--features", o.features, "directory holding train.rscf / test.rscf");
  sub->add_option("--model", o.model, "model file");
}

void add_ablation(CLI::App* sub, Options& o) {
  sub->add_option("--layer", o.layer, "hidden layer index (0 = FC-0)");
  sub->add_option("--fraction", o.fraction, "group fraction of the layer");
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, bool color) {
  Options o;
  CLI::App app{"Spatial relation classifier toolkit: synthetic data, training, occlusion and ablation analysis.",
               "relscope"};
  app.require_subcommand(1, 1);
  app.fallthrough(false);
  struct Cmd {
    const char* name;
    const char* help;
    int (*fn)(const Options&, std::ostream&);
  };
  const Cmd cmds[] = {
      {"gen-data", "generate the synthetic dataset", cmd_gen_data},
      {"extract", "extract feature vectors for both splits", cmd_extract},
      {"train", "train the MLP classifier", cmd_train},
      {"eval", "class-wise accuracy on train/test features", cmd_eval},
      {"occlude", "occlusion influence scans and heatmaps", cmd_occlude},
      {"node-scan", "per-node influence matrix for one hidden layer", cmd_node_scan},
      {"group-ablate", "ablate the top node group of each relation", cmd_group_ablate},
      {"report", "aggregate tables and heatmap gallery", cmd_report},
  };
  std::vector<CLI::App*> subs;
  for (const auto& cmd : cmds) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    add_common(sub, o);
    subs.push_back(sub);
  }
  add_ablation(subs[5], o);
  add_ablation(subs[6], o);
  subs[6]->add_option("--matrix", o.matrix, "node matrix CSV from node-scan");
  CLI::App* occ = subs[4];
  occ->add_option("--mask-size", o.mask_size, "mask size, N or WxH");
  occ->add_option("--step", o.step, "mask stride");
  occ->add_option("--threshold", o.threshold, "important-region threshold on E");
  occ->add_option("--mask-color", o.mask_color, "gray level or r,g,b");
  occ->add_option("--per-relation", o.per_relation, "images scanned per relation");
  occ->add_option("--image", o.image, "scan a single image instead of the dataset");
  occ->add_option("--label", o.label, "true relation of --image");

  const std::string prefix = color ? "\x1b[31mrelscope: error:\x1b[0m " : "relscope: error: ";
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << prefix << e.what() << "\n" << app.help();
    return kExitUsage;
  }
  for (size_t i = 0; i < subs.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    try {
      return cmds[i].fn(o, out);
    } catch (const UsageError& e) {
      err << prefix << e.what() << "\n";
      return kExitUsage;
    } catch (const std::exception& e) {
      err << prefix << e.what() << "\n";
      return kExitRuntime;
    }
  }
  err << prefix << "no subcommand\n" << app.help();
  return kExitUsage;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return run(args, out, err, false);
}

int run_command(int argc, char** argv) {
  const bool color = isatty(STDERR_FILENO) && std::getenv("NO_COLOR") == nullptr;
  return run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr, color);
}

}  // namespace relscope
