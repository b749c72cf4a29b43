// End-to-end acceptance run. Prints one PASS/FAIL line per criterion.
//
// The exit status is non-zero only when the harness itself breaks (a pipeline
// command errors out). A criterion that is evaluated and missed prints FAIL
// and is counted in the final tally; pass --strict to turn any FAIL into a
// non-zero exit.

#include "relscope/ablation.hpp"
#include "relscope/cli.hpp"
#include "relscope/influence.hpp"
#include "relscope/model_io.hpp"
#include "relscope/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

using namespace relscope;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Tolerances and bars.
constexpr double kTrainAccuracyMin = 0.95;
constexpr double kTestAccuracyMin = 0.55;
constexpr double kTrainSecondsMax = 600.0;
constexpr double kDatasetSecondsMax = 120.0;
constexpr double kAblationSecondsMax = 900.0;
constexpr double kOwnAccuracyMax = 0.5;
constexpr double kOtherAccuracyMin = 0.9;
constexpr double kContrastPositiveMin = 0.80;
constexpr double kAboveQ95Min = 0.60;
constexpr int kPerRelation = 50;
constexpr int kShuffles = 1000;
constexpr double kGradRelErrMax = 1e-4;
constexpr double kSoftmaxSumTol = 1e-9;
constexpr double kNumericSecondsMax = 10.0;

int passed = 0, total = 0;

void verdict(const std::string& name, bool ok, const std::string& detail) {
  ++total;
  passed += ok;
  std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string num(double v, const char* f = "%.4f") {
  char b[64];
  std::snprintf(b, sizeof b, f, v);
  return b;
}

void cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int status = run_command(args, out, err);
  if (status != 0) throw std::runtime_error("relscope " + args.front() + " exited " + std::to_string(status) + ": " + err.str());
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

// Relation predicate on recorded masks, written from the placement rules
// rather than taken from the library.
bool oracle_masks_satisfy(Relation rel, const Mask& a, const Mask& b) {
  const int gap = 8;
  const double iou_lo = 0.25, iou_hi = 0.6;
  int ax0 = a.width, ay0 = a.height, ax1 = -1, ay1 = -1, bx0 = b.width, by0 = b.height, bx1 = -1, by1 = -1;
  long overlap = 0;
  for (int y = 0; y < a.height; ++y)
    for (int x = 0; x < a.width; ++x) {
      const bool pa = a.bits[static_cast<size_t>(y * a.width + x)] != 0;
      const bool pb = b.bits[static_cast<size_t>(y * b.width + x)] != 0;
      if (pa) ax0 = std::min(ax0, x), ay0 = std::min(ay0, y), ax1 = std::max(ax1, x), ay1 = std::max(ay1, y);
      if (pb) bx0 = std::min(bx0, x), by0 = std::min(by0, y), bx1 = std::max(bx1, x), by1 = std::max(by1, y);
      overlap += pa && pb;
    }
  if (ax1 < 0 || bx1 < 0) return false;
  const int aw = ax1 - ax0 + 1, ah = ay1 - ay0 + 1, bw = bx1 - bx0 + 1, bh = by1 - by0 + 1;
  switch (rel) {
    case Relation::Above:
      return ay1 + 1 + gap <= by0 && std::abs((2 * ax0 + aw) - (2 * bx0 + bw)) <= std::max(aw, bw);
    case Relation::Beside:
      return ax1 + 1 + gap <= bx0 && std::abs((2 * ay0 + ah) - (2 * by0 + bh)) <= std::max(ah, bh);
    case Relation::Behind: {
      const long iw = std::max(0, std::min(ax1, bx1) - std::max(ax0, bx0) + 1);
      const long ih = std::max(0, std::min(ay1, by1) - std::max(ay0, by0) + 1);
      const double inter = static_cast<double>(iw * ih);
      const double iou = inter / (static_cast<double>(aw) * ah + static_cast<double>(bw) * bh - inter);
      return iou >= iou_lo && iou <= iou_hi && overlap > 0;
    }
  }
  return false;
}

// ---------------------------------------------------------------- criteria

void check_grid() {
  Timer t;
  const auto grid = occlusion_grid(224, 224, OcclusionConfig{});
  const double s = t.seconds();
  verdict("occlusion grid count", grid.size() == 196 && s < 1.0,
          std::to_string(grid.size()) + " records (expected 196) in " + num(s, "%.3f") + " s");
}

void check_numerics() {
  Timer t;
  using ModelD = MlpModel<double>;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ModelD m = ModelD::initialized(8, {5, 4}, 3, seed);
    Rng rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    for (auto& l : m.layers())
      for (Index j = 0; j < l.bias.size(); ++j) l.bias[j] = uniform_real(rng, 0.05, 0.3);
    RowMatrixXd x(6, 8);
    for (Index i = 0; i < x.rows(); ++i)
      for (Index j = 0; j < x.cols(); ++j) x(i, j) = g(rng);
    RowMatrixXd y = RowMatrixXd::Zero(6, 3);
    for (Index i = 0; i < 6; ++i) y(i, i % 3) = 1.0;
    auto loss = [&] {
      const auto pass = forward(m, x);
      double s = 0.0;
      for (Index i = 0; i < 6; ++i) s -= std::log(pass.probabilities(i, i % 3));
      return s / 6.0;
    };
    const auto grad = gradient(m, x, y);
    for (size_t l = 0; l < m.layers().size(); ++l) {
      auto probe = [&](double& p, double analytic) {
        const double keep = p, h = 1e-6;
        p = keep + h;
        const double up = loss();
        p = keep - h;
        const double down = loss();
        p = keep;
        const double numeric = (up - down) / (2 * h);
        const double scale = std::max(std::abs(numeric), std::abs(analytic));
        if (scale > 1e-7) worst = std::max(worst, std::abs(numeric - analytic) / scale);
      };
      auto& W = m.layers()[l].weights;
      for (Index i = 0; i < W.rows(); ++i)
        for (Index j = 0; j < W.cols(); ++j) probe(W(i, j), grad.weights[l](i, j));
      for (Index j = 0; j < m.layers()[l].bias.size(); ++j) probe(m.layers()[l].bias[j], grad.biases[l][j]);
    }
  }

  double sum_err = 0.0;
  Rng rng(1);
  for (int r = 0; r < 200; ++r) {
    RowMatrixXd z(1, 3);
    for (Index j = 0; j < 3; ++j) z(0, j) = uniform_real(rng, -1e3, 1e3);
    sum_err = std::max(sum_err, std::abs(softmax_rows(z).sum() - 1.0));
  }
  const Eigen::RowVector3d q(1.0, 0.0, 0.0);
  const double ce = cross_entropy(q, q);
  const double e0 = influence(0.731, 0.731).value;

  const Model net = Model::initialized(16, {12, 8}, 3, 3);
  RowMatrixXf x = RowMatrixXf::Random(20, 16);
  AblationSet<float> ones{AblationVector<float>::ones(12), AblationVector<float>::ones(8)};
  const bool identity = forward(net, x).logits == forward(net, x, &ones).logits;
  const double s = t.seconds();

  const bool ok = worst <= kGradRelErrMax && sum_err <= kSoftmaxSumTol && ce == 0.0 && e0 == 0.0 && identity &&
                  s < kNumericSecondsMax;
  verdict("numerical core", ok,
          "grad max rel err " + num(worst, "%.2e") + ", softmax sum err " + num(sum_err, "%.1e") + ", CE(Q=1)=" +
              num(ce, "%g") + ", E(C,C)=" + num(e0, "%g") + ", ones ablation " + (identity ? "exact" : "differs") +
              ", " + num(s, "%.2f") + " s");
}

void check_dataset(const fs::path& root, double seconds) {
  const DatasetManifest m = load_manifest(root);
  std::set<std::string> train_objs, test_objs;
  for (const auto& e : m.train) train_objs.insert(e.object_a), train_objs.insert(e.object_b);
  for (const auto& e : m.test) test_objs.insert(e.object_a), test_objs.insert(e.object_b);
  std::set<std::string> shared;
  std::set_intersection(train_objs.begin(), train_objs.end(), test_objs.begin(), test_objs.end(),
                        std::inserter(shared, shared.begin()));
  std::set<std::uint32_t> train_bg, test_bg;
  auto key = [](Rgb c) { return (std::uint32_t{c.r} << 16) | (std::uint32_t{c.g} << 8) | c.b; };
  for (const auto& e : m.train) train_bg.insert(key(e.background));
  for (const auto& e : m.test) test_bg.insert(key(e.background));
  bool bg_disjoint = true;
  for (auto c : test_bg) bg_disjoint = bg_disjoint && !train_bg.contains(c);

  long ok = 0, n = 0;
  for (const auto* split : {&m.train, &m.test})
    for (const auto& e : *split) {
      ++n;
      ok += oracle_masks_satisfy(e.label, read_png_mask(root / mask_file(e.file, 'a')),
                                 read_png_mask(root / mask_file(e.file, 'b')));
    }
  const bool pass = m.train.size() == 2628 && m.test.size() == 432 && train_objs.size() == 10 &&
                    test_objs.size() == 5 && shared.empty() && bg_disjoint && ok == n && seconds < kDatasetSecondsMax;
  verdict("dataset geometry", pass,
          std::to_string(m.train.size()) + "/" + std::to_string(m.test.size()) + " images, objects " +
              std::to_string(train_objs.size()) + " vs " + std::to_string(test_objs.size()) + " (" +
              std::to_string(shared.size()) + " shared), palettes " + (bg_disjoint ? "disjoint" : "overlap") +
              ", predicate holds on " + std::to_string(ok) + "/" + std::to_string(n) + ", generated in " +
              num(seconds, "%.1f") + " s");
}

void check_training(const fs::path& features, const fs::path& model_path, double seconds) {
  const Model model = load_model(model_path).model;
  const double train_acc = evaluate(model, load_feature_file(features / "train.rscf")).accuracy;
  const double test_acc = evaluate(model, load_feature_file(features / "test.rscf")).accuracy;
  verdict("training behavior", train_acc >= kTrainAccuracyMin && test_acc >= kTestAccuracyMin && seconds <= kTrainSecondsMax,
          "train " + num(train_acc) + " (>= " + num(kTrainAccuracyMin, "%.2f") + "), test " + num(test_acc) +
              " (>= " + num(kTestAccuracyMin, "%.2f") + "), trained in " + num(seconds, "%.0f") + " s");
}

void check_ablation(const fs::path& out, double seconds) {
  const auto rows = read_csv(out / "ablation" / "fc0_accuracy.csv");
  bool ok = rows.size() == 4;
  std::string detail;
  for (int k = 0; k < kNumRelations && rows.size() == 4; ++k) {
    const auto& row = rows[static_cast<size_t>(k + 1)];
    for (int j = 0; j < kNumRelations; ++j) {
      const double a = std::stod(row[static_cast<size_t>(j + 2)]);
      ok = ok && (j == k ? a <= kOwnAccuracyMax : a >= kOtherAccuracyMin);
    }
    detail += (k ? "; " : "") + class_name(k) + " group -> " + row[2] + "/" + row[3] + "/" + row[4];
  }
  ok = ok && seconds <= kAblationSecondsMax;
  verdict("ablation selectivity", ok,
          detail + " (own <= " + num(kOwnAccuracyMax, "%.1f") + ", others >= " + num(kOtherAccuracyMin, "%.1f") +
              "), scan+ablate " + num(seconds, "%.0f") + " s");

  const auto dec = read_csv(out / "ablation" / "fc0_decomposition.csv");
  bool net = dec.size() == 3;
  std::string d2;
  for (const auto& r : dec) {
    const double pos = std::stod(r[5]), neg = std::stod(r[6]);
    net = net && pos > neg;
    d2 += (d2.empty() ? "" : "; ") + r[2] + " +" + num(pos) + " vs -" + num(neg);
  }
  verdict("net-positive group influence", net, d2);
}

void check_occlusion(const fs::path& data, const fs::path& out) {
  const auto rows = read_csv(out / "occlusion" / "localization.csv");
  std::map<std::string, int> per_rel;
  int positive = 0, above = 0, agree = 0;
  std::mt19937 rng(20240229);
  for (const auto& r : rows) {
    ++per_rel[r[1]];
    std::string stem = fs::path(r[0]).replace_extension().string();
    std::replace(stem.begin(), stem.end(), '/', '_');
    const auto cells = read_csv(out / "occlusion" / (stem + ".csv"));
    const Mask a = read_png_mask(data / mask_file(r[0], 'a'));
    const Mask b = read_png_mask(data / mask_file(r[0], 'b'));
    const Rect ba = a.bounds(), bb = b.bounds();
    // Band between the boxes on each axis: overlap if any, else the gap.
    auto span = [](int a0, int a1, int b0, int b1) {
      return std::max(a0, b0) < std::min(a1, b1) ? std::pair{std::max(a0, b0), std::min(a1, b1)}
                                                  : std::pair{std::min(a1, b1), std::max(a0, b0)};
    };
    const auto [bx0, bx1] = span(ba.x, ba.x + ba.w, bb.x, bb.x + bb.w);
    const auto [by0, by1] = span(ba.y, ba.y + ba.h, bb.y, bb.y + bb.h);

    std::vector<double> e;
    std::vector<char> flag;
    for (const auto& c : cells) {
      const int x = std::stoi(c[1]), y = std::stoi(c[2]), w = std::stoi(c[3]), h = std::stoi(c[4]);
      bool f = bx0 < bx1 && by0 < by1 && x < bx1 && bx0 < x + w && y < by1 && by0 < y + h;
      for (int yy = y; yy < y + h && !f; ++yy)
        for (int xx = x; xx < x + w && !f; ++xx) f = a.at(xx, yy) || b.at(xx, yy);
      e.push_back(std::stod(c[6]));
      flag.push_back(f);
    }
    auto contrast = [&](const std::vector<double>& v) {
      double si = 0, so = 0;
      int ni = 0, no = 0;
      for (size_t i = 0; i < v.size(); ++i) (flag[i] ? (si += v[i], ++ni) : (so += v[i], ++no));
      return si / ni - so / no;
    };
    const double obs = contrast(e);
    std::vector<double> null(kShuffles), perm = e;
    for (auto& s : null) {
      for (size_t i = perm.size() - 1; i > 0; --i) std::swap(perm[i], perm[std::uniform_int_distribution<size_t>(0, i)(rng)]);
      s = contrast(perm);
    }
    std::sort(null.begin(), null.end());
    const double q95 = null[static_cast<size_t>(std::ceil(0.95 * kShuffles)) - 1];
    positive += obs > 0.0;
    above += obs > q95;
    agree += (obs > q95) == (r[8] == "1");
  }
  const int n = static_cast<int>(rows.size());
  const double fp = n ? static_cast<double>(positive) / n : 0.0, fq = n ? static_cast<double>(above) / n : 0.0;
  std::string counts;
  for (const auto& [rel, c] : per_rel) counts += (counts.empty() ? "" : " ") + rel + "=" + std::to_string(c);
  verdict("occlusion localization", n == 3 * kPerRelation && fp >= kContrastPositiveMin && fq >= kAboveQ95Min,
          "contrast > 0 on " + num(fp, "%.3f") + " (>= " + num(kContrastPositiveMin, "%.2f") + "), above oracle q95 on " +
              num(fq, "%.3f") + " (>= " + num(kAboveQ95Min, "%.2f") + "), images " + counts +
              ", oracle/tool agreement " + std::to_string(agree) + "/" + std::to_string(n));
}

// Every regular file under root, relative path -> bytes.
std::map<std::string, std::vector<std::uint8_t>> snapshot(const fs::path& root) {
  std::map<std::string, std::vector<std::uint8_t>> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = read_file(e.path());
  return files;
}

void reduced_pipeline(const fs::path& dir, std::uint64_t seed, int workers) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path home = fs::current_path();
  fs::current_path(dir);
  std::ofstream("run.ini") << "[data]\ntrain_count = 60\ntest_count = 12\n[train]\nepochs = 2\n"
                              "[occlusion]\nper_relation = 2\nshuffles = 100\n";
  const std::vector<std::string> common{"--config", "run.ini", "--seed", std::to_string(seed), "--workers",
                                        std::to_string(workers)};
  try {
    for (const char* cmd : {"gen-data", "extract", "train", "eval", "occlude", "node-scan", "group-ablate", "report"}) {
      std::vector<std::string> args{cmd};
      args.insert(args.end(), common.begin(), common.end());
      cli(args);
    }
  } catch (...) {
    fs::current_path(home);
    throw;
  }
  fs::current_path(home);
}

void check_determinism(const fs::path& work, std::uint64_t seed, int workers) {
  const int other = std::max(workers, 1) + 2;
  reduced_pipeline(work / "det_a", seed, 1);
  reduced_pipeline(work / "det_b", seed, other);
  const auto a = snapshot(work / "det_a"), b = snapshot(work / "det_b");
  std::map<std::string, int> kinds;
  std::vector<std::string> diff;
  for (const auto& [path, bytes] : a) {
    ++kinds[fs::path(path).extension().string()];
    auto it = b.find(path);
    if (it == b.end() || it->second != bytes) diff.push_back(path);
  }
  for (const auto& [path, bytes] : b)
    if (!a.contains(path)) diff.push_back(path);
  std::string k;
  for (const auto& [ext, c] : kinds) k += (k.empty() ? "" : " ") + ext + ":" + std::to_string(c);
  const bool needed = kinds[".png"] > 0 && kinds[".csv"] > 0 && kinds[".rscm"] == 1 && kinds[".json"] > 0;
  verdict("determinism", diff.empty() && needed,
          "workers 1 vs " + std::to_string(other) + ", " + std::to_string(a.size()) + " files compared (" + k + "), " +
              std::to_string(diff.size()) + " differ" + (diff.empty() ? "" : " e.g. " + diff.front()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"relscope acceptance run"};
  std::string work = "acceptance_work";
  std::uint64_t seed = 7;
  int workers = 1;
  bool strict = false, skip_full = false;
  app.add_option("--work", work, "scratch directory");
  app.add_option("--seed", seed, "root seed for the full pipeline");
  app.add_option("--workers", workers, "worker threads");
  app.add_flag("--strict", strict, "exit non-zero when any criterion fails");
  app.add_flag("--skip-full", skip_full, "only run the fast criteria");
  CLI11_PARSE(app, argc, argv);

  try {
    const fs::path root = fs::absolute(work);
    fs::create_directories(root);
    check_grid();
    check_numerics();
    if (!skip_full) {
      const fs::path data = root / "data", features = root / "features", out = root / "out",
                     model = root / "model" / "model.rscm";
      const std::vector<std::string> common{"--seed", std::to_string(seed), "--workers", std::to_string(workers),
                                            "--data", data.string(), "--features", features.string(),
                                            "--model", model.string()};
      auto run = [&](std::vector<std::string> args) {
        args.insert(args.end(), common.begin(), common.end());
        args.insert(args.end(), {"--out", out.string()});
        cli(args);
      };
      fs::remove_all(data);
      Timer tg;
      cli([&] {
        std::vector<std::string> a{"gen-data"};
        a.insert(a.end(), common.begin(), common.end());
        a.insert(a.end(), {"--out", data.string()});
        return a;
      }());
      check_dataset(data, tg.seconds());

      cli([&] {
        std::vector<std::string> a{"extract"};
        a.insert(a.end(), common.begin(), common.end());
        a.insert(a.end(), {"--out", features.string()});
        return a;
      }());
      Timer tt;
      cli([&] {
        std::vector<std::string> a{"train"};
        a.insert(a.end(), common.begin(), common.end());
        return a;
      }());
      check_training(features, model, tt.seconds());

      Timer ta;
      run({"node-scan", "--layer", "0", "--fraction", "0.25"});
      run({"group-ablate", "--layer", "0", "--fraction", "0.25"});
      check_ablation(out, ta.seconds());

      run({"occlude", "--per-relation", std::to_string(kPerRelation)});
      check_occlusion(data, out);

      check_determinism(root, seed, workers);
    }
  } catch (const std::exception& e) {
    std::cout << "ERROR acceptance harness: " << e.what() << std::endl;
    return 1;
  }
  std::cout << "acceptance: " << passed << "/" << total << " criteria passed" << std::endl;
  return strict && passed != total ? 1 : 0;
}
