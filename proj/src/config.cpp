#include "relscope/config.hpp"

#include "relscope/image.hpp"
#include "relscope/rng.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

namespace relscope {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  size_t start = 0;
  while (true) {
    const size_t pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void bad_value(const std::string& key, std::string_view expected, std::string_view got) {
  throw UsageError("config key '" + key + "': expected " + std::string(expected) + ", got '" + std::string(got) + "'");
}

template <typename T>
T parse_number(const std::string& key, std::string_view text, std::string_view what) {
  const std::string t = trim(text);
  T v{};
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) bad_value(key, what, text);
  return v;
}

int to_int(const std::string& key, std::string_view t) { return parse_number<int>(key, t, "an integer"); }
double to_double(const std::string& key, std::string_view t) { return parse_number<double>(key, t, "a number"); }
std::uint64_t to_u64(const std::string& key, std::string_view t) {
  return parse_number<std::uint64_t>(key, t, "a non-negative integer");
}

bool to_bool(const std::string& key, std::string_view text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  bad_value(key, "a boolean", text);
}

Rgb hex_color(const std::string& key, std::string_view text) {
  const std::string t = trim(text);
  if (t.size() != 7 || t[0] != '#') bad_value(key, "#rrggbb colours", text);
  unsigned v = 0;
  const auto [ptr, ec] = std::from_chars(t.data() + 1, t.data() + 7, v, 16);
  if (ec != std::errc() || ptr != t.data() + 7) bad_value(key, "#rrggbb colours", text);
  return {static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>(v >> 8), static_cast<std::uint8_t>(v)};
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_color(Rgb c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
  return buf;
}

template <typename T, typename F>
std::string join(const std::vector<T>& items, F&& fmt) {
  std::string out;
  for (size_t i = 0; i < items.size(); ++i) {
    if (i) out += ",";
    out += fmt(items[i]);
  }
  return out;
}

std::string plan_text(const std::vector<ConvStage>& plan) {
  return join(plan, [](const ConvStage& s) {
    return std::to_string(s.out_channels) + ":" + std::to_string(s.kernel) + ":" + std::to_string(s.conv_stride) +
           ":" + std::to_string(s.pool);
  });
}

std::vector<ConvStage> parse_plan(const std::string& key, std::string_view text) {
  std::vector<ConvStage> plan;
  for (const auto& stage : split(text, ',')) {
    const auto parts = split(stage, ':');
    if (parts.size() != 4) bad_value(key, "channels:kernel:stride:pool stages", text);
    plan.push_back({to_int(key, parts[0]), to_int(key, parts[1]), to_int(key, parts[2]), to_int(key, parts[3])});
  }
  if (plan.empty()) bad_value(key, "at least one stage", text);
  return plan;
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, std::map<std::string, Setter>>& schema() {
  static const std::map<std::string, std::map<std::string, Setter>> s = {
      {"run",
       {{"seed", [](RunConfig& c, auto& k, auto& v) { c.seed = to_u64(k, v); }},
        {"workers", [](RunConfig& c, auto& k, auto& v) { c.workers = to_int(k, v); }}}},
      {"paths",
       {{"data", [](RunConfig& c, auto&, auto& v) { c.paths.data = v; }},
        {"features", [](RunConfig& c, auto&, auto& v) { c.paths.features = v; }},
        {"model", [](RunConfig& c, auto&, auto& v) { c.paths.model = v; }},
        {"out", [](RunConfig& c, auto&, auto& v) { c.paths.out = v; }}}},
      {"data",
       {{"train_count", [](RunConfig& c, auto& k, auto& v) { c.data.train_count = to_int(k, v); }},
        {"test_count", [](RunConfig& c, auto& k, auto& v) { c.data.test_count = to_int(k, v); }},
        {"canvas",
         [](RunConfig& c, auto& k, auto& v) {
           const auto [w, h] = parse_mask_size(v);
           (void)k;
           c.data.canvas = {w, h};
         }},
        {"train_objects", [](RunConfig& c, auto&, auto& v) { c.data.train_objects = split(v, ','); }},
        {"test_objects", [](RunConfig& c, auto&, auto& v) { c.data.test_objects = split(v, ','); }},
        {"train_backgrounds",
         [](RunConfig& c, auto& k, auto& v) {
           c.data.train_backgrounds.clear();
           for (const auto& s : split(v, ',')) c.data.train_backgrounds.push_back(hex_color(k, s));
         }},
        {"test_backgrounds",
         [](RunConfig& c, auto& k, auto& v) {
           c.data.test_backgrounds.clear();
           for (const auto& s : split(v, ',')) c.data.test_backgrounds.push_back(hex_color(k, s));
         }},
        {"rotations",
         [](RunConfig& c, auto& k, auto& v) {
           c.data.rotations.clear();
           for (const auto& s : split(v, ',')) c.data.rotations.push_back(to_double(k, s));
         }},
        {"scale_min", [](RunConfig& c, auto& k, auto& v) { c.data.scale_min = to_double(k, v); }},
        {"scale_max", [](RunConfig& c, auto& k, auto& v) { c.data.scale_max = to_double(k, v); }},
        {"gap_min", [](RunConfig& c, auto& k, auto& v) { c.data.rules.gap_min = to_int(k, v); }},
        {"behind_iou_min", [](RunConfig& c, auto& k, auto& v) { c.data.rules.behind_iou_min = to_double(k, v); }},
        {"behind_iou_max", [](RunConfig& c, auto& k, auto& v) { c.data.rules.behind_iou_max = to_double(k, v); }},
        {"behind_depth_scale",
         [](RunConfig& c, auto& k, auto& v) { c.data.rules.behind_depth_scale = to_double(k, v); }},
        {"max_attempts", [](RunConfig& c, auto& k, auto& v) { c.data.rules.max_attempts = to_int(k, v); }},
        {"sprite_dir", [](RunConfig& c, auto&, auto& v) { c.data.sprite_dir = v; }}}},
      {"extractor",
       {{"kind", [](RunConfig& c, auto& k, auto& v) {
           try {
             c.extractor.kind = parse_extractor_kind(trim(v));
           } catch (const Error&) {
             bad_value(k, "frozen_conv, raw_downsample or external", v);
           }
         }},
        {"seed",
         [](RunConfig& c, auto& k, auto& v) {
           c.extractor.seed = to_u64(k, v);
           c.extractor_seed_set = true;
         }},
        {"input_size", [](RunConfig& c, auto& k, auto& v) { c.extractor.input_size = to_int(k, v); }},
        {"plan", [](RunConfig& c, auto& k, auto& v) { c.extractor.plan = parse_plan(k, v); }},
        {"grid",
         [](RunConfig& c, auto&, auto& v) {
           const auto [w, h] = parse_mask_size(v);
           c.extractor.grid_cols = w;
           c.extractor.grid_rows = h;
         }},
        {"output_dim", [](RunConfig& c, auto& k, auto& v) { c.extractor.output_dim = to_int(k, v); }}}},
      {"train",
       {{"learning_rate", [](RunConfig& c, auto& k, auto& v) { c.train.learning_rate = to_double(k, v); }},
        {"batch_size", [](RunConfig& c, auto& k, auto& v) { c.train.batch_size = to_int(k, v); }},
        {"dropout", [](RunConfig& c, auto& k, auto& v) { c.train.dropout_rate = to_double(k, v); }},
        {"epochs", [](RunConfig& c, auto& k, auto& v) { c.train.epochs = to_int(k, v); }},
        {"early_stop_loss", [](RunConfig& c, auto& k, auto& v) { c.train.early_stop_loss = to_double(k, v); }},
        {"beta1", [](RunConfig& c, auto& k, auto& v) { c.train.beta1 = to_double(k, v); }},
        {"beta2", [](RunConfig& c, auto& k, auto& v) { c.train.beta2 = to_double(k, v); }},
        {"epsilon", [](RunConfig& c, auto& k, auto& v) { c.train.epsilon = to_double(k, v); }},
        {"hidden",
         [](RunConfig& c, auto& k, auto& v) {
           c.train.hidden.clear();
           for (const auto& s : split(v, ',')) c.train.hidden.push_back(to_int(k, s));
         }}}},
      {"occlusion",
       {{"mask_size",
         [](RunConfig& c, auto&, auto& v) {
           const auto [w, h] = parse_mask_size(v);
           c.occlusion.scan.mask_width = w;
           c.occlusion.scan.mask_height = h;
         }},
        {"step", [](RunConfig& c, auto& k, auto& v) { c.occlusion.scan.step = to_int(k, v); }},
        {"mask_color", [](RunConfig& c, auto&, auto& v) { c.occlusion.scan.mask_color = parse_color(v); }},
        {"threshold", [](RunConfig& c, auto& k, auto& v) { c.occlusion.threshold = to_double(k, v); }},
        {"per_relation", [](RunConfig& c, auto& k, auto& v) { c.occlusion.per_relation = to_int(k, v); }},
        {"split", [](RunConfig& c, auto&, auto& v) { c.occlusion.split = trim(v); }},
        {"smooth", [](RunConfig& c, auto& k, auto& v) { c.occlusion.smooth = to_bool(k, v); }},
        {"shuffles", [](RunConfig& c, auto& k, auto& v) { c.occlusion.shuffles = to_int(k, v); }}}},
      {"ablation",
       {{"layer", [](RunConfig& c, auto& k, auto& v) { c.ablation.layer = to_int(k, v); }},
        {"fraction", [](RunConfig& c, auto& k, auto& v) { c.ablation.fraction = to_double(k, v); }},
        {"correct_only", [](RunConfig& c, auto& k, auto& v) { c.ablation.correct_only = to_bool(k, v); }}}},
  };
  return s;
}

}  // namespace

std::pair<int, int> parse_mask_size(std::string_view text) {
  const std::string t = trim(text);
  const auto x = t.find('x');
  if (x == std::string::npos) {
    const int s = to_int("size", t);
    return {s, s};
  }
  return {to_int("size", t.substr(0, x)), to_int("size", t.substr(x + 1))};
}

Rgb parse_color(std::string_view text) {
  const auto parts = split(text, ',');
  auto channel = [&](const std::string& s) {
    const int v = to_int("colour", s);
    if (v < 0 || v > 255) bad_value("colour", "channels in [0, 255]", text);
    return static_cast<std::uint8_t>(v);
  };
  if (parts.size() == 1) {
    const auto g = channel(parts[0]);
    return {g, g, g};
  }
  if (parts.size() != 3) bad_value("colour", "a gray level or r,g,b", text);
  return {channel(parts[0]), channel(parts[1]), channel(parts[2])};
}

RunConfig parse_config(std::string_view text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw UsageError("config parse error at line " + std::to_string(e.line()) + ": " + e.message());
  }
  RunConfig c;
  const auto& sections = schema();
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw UsageError("config key '" + section + "' must be inside a section");
    const auto s = sections.find(section);
    if (s == sections.end()) throw UsageError("unknown config section [" + section + "]");
    for (const auto& [key, value] : body) {
      const auto k = s->second.find(key);
      if (k == s->second.end()) throw UsageError("unknown config key '" + key + "' in [" + section + "]");
      k->second(c, section + "." + key, value.data());
    }
  }
  c.resolve();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes;
  try {
    bytes = read_file(path);
  } catch (const Error&) {
    throw UsageError("cannot read config file " + path.string());
  }
  return parse_config(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

void RunConfig::resolve() {
  if (!extractor_seed_set) extractor.seed = derive_seed(seed, "extractor");
  train.seed = seed;
}

void RunConfig::validate(std::string_view command) const {
  if (workers < 1) throw UsageError("workers must be >= 1");
  train.validate();
  if (train.hidden.empty()) throw UsageError("train.hidden needs at least one layer");
  for (Index h : train.hidden)
    if (h < 1) throw UsageError("train.hidden sizes must be positive");
  if (data.scale_min <= 0 || data.scale_max > 1.0 || data.scale_min > data.scale_max)
    throw UsageError("data scale range must satisfy 0 < scale_min <= scale_max <= 1");
  if (occlusion.scan.mask_width < 1 || occlusion.scan.mask_height < 1 || occlusion.scan.step < 1)
    throw UsageError("occlusion mask size and step must be positive");
  if (occlusion.split != "train" && occlusion.split != "test") throw UsageError("occlusion.split must be train or test");
  if (occlusion.per_relation < 1) throw UsageError("occlusion.per_relation must be >= 1");
  if (occlusion.shuffles < 1) throw UsageError("occlusion.shuffles must be >= 1");
  if (!(ablation.fraction > 0.0 && ablation.fraction <= 1.0)) throw UsageError("ablation.fraction must be in (0, 1]");
  if (ablation.layer < 0 || ablation.layer >= static_cast<int>(train.hidden.size()))
    throw UsageError("ablation.layer " + std::to_string(ablation.layer) + " out of range for " +
                     std::to_string(train.hidden.size()) + " hidden layers");
  if (extractor.kind == ExtractorKind::External && (command == "occlude" || command == "extract"))
    throw UnsupportedConfiguration("extractor.kind = external cannot drive '" + std::string(command) +
                                   "': masked images cannot be re-extracted");
}

std::string config_to_ini(const RunConfig& c) {
  std::string s;
  auto kv = [&](const std::string& k, const std::string& v) { s += k + " = " + v + "\n"; };
  s += "[run]\n";
  kv("seed", std::to_string(c.seed));
  s += "\n[paths]\n";
  kv("data", c.paths.data);
  kv("features", c.paths.features);
  kv("model", c.paths.model);
  kv("out", c.paths.out);
  s += "\n[data]\n";
  kv("train_count", std::to_string(c.data.train_count));
  kv("test_count", std::to_string(c.data.test_count));
  kv("canvas", std::to_string(c.data.canvas.width) + "x" + std::to_string(c.data.canvas.height));
  kv("train_objects", join(c.data.train_objects, [](const std::string& o) { return o; }));
  kv("test_objects", join(c.data.test_objects, [](const std::string& o) { return o; }));
  kv("train_backgrounds", join(c.data.train_backgrounds, fmt_color));
  kv("test_backgrounds", join(c.data.test_backgrounds, fmt_color));
  kv("rotations", join(c.data.rotations, fmt_double));
  kv("scale_min", fmt_double(c.data.scale_min));
  kv("scale_max", fmt_double(c.data.scale_max));
  kv("gap_min", std::to_string(c.data.rules.gap_min));
  kv("behind_iou_min", fmt_double(c.data.rules.behind_iou_min));
  kv("behind_iou_max", fmt_double(c.data.rules.behind_iou_max));
  kv("behind_depth_scale", fmt_double(c.data.rules.behind_depth_scale));
  kv("max_attempts", std::to_string(c.data.rules.max_attempts));
  kv("sprite_dir", c.data.sprite_dir);
  s += "\n[extractor]\n";
  kv("kind", std::string(extractor_kind_name(c.extractor.kind)));
  kv("seed", std::to_string(c.extractor.seed));
  kv("input_size", std::to_string(c.extractor.input_size));
  kv("plan", plan_text(c.extractor.plan));
  kv("grid", std::to_string(c.extractor.grid_cols) + "x" + std::to_string(c.extractor.grid_rows));
  kv("output_dim", std::to_string(c.extractor.output_dim));
  s += "\n[train]\n";
  kv("learning_rate", fmt_double(c.train.learning_rate));
  kv("batch_size", std::to_string(c.train.batch_size));
  kv("dropout", fmt_double(c.train.dropout_rate));
  kv("epochs", std::to_string(c.train.epochs));
  kv("early_stop_loss", fmt_double(c.train.early_stop_loss));
  kv("beta1", fmt_double(c.train.beta1));
  kv("beta2", fmt_double(c.train.beta2));
  kv("epsilon", fmt_double(c.train.epsilon));
  kv("hidden", join(c.train.hidden, [](Index h) { return std::to_string(h); }));
  s += "\n[occlusion]\n";
  kv("mask_size", std::to_string(c.occlusion.scan.mask_width) + "x" + std::to_string(c.occlusion.scan.mask_height));
  kv("step", std::to_string(c.occlusion.scan.step));
  const Rgb m = c.occlusion.scan.mask_color;
  kv("mask_color", std::to_string(m.r) + "," + std::to_string(m.g) + "," + std::to_string(m.b));
  kv("threshold", fmt_double(c.occlusion.threshold));
  kv("per_relation", std::to_string(c.occlusion.per_relation));
  kv("split", c.occlusion.split);
  kv("smooth", c.occlusion.smooth ? "true" : "false");
  kv("shuffles", std::to_string(c.occlusion.shuffles));
  s += "\n[ablation]\n";
  kv("layer", std::to_string(c.ablation.layer));
  kv("fraction", fmt_double(c.ablation.fraction));
  kv("correct_only", c.ablation.correct_only ? "true" : "false");
  return s;
}

}  // namespace relscope
