#include "relscope/synth.hpp"

#include "relscope/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>

namespace relscope {

namespace {

// Center offset test in doubled coordinates to stay in integers.
bool centers_within(int pos_a, int len_a, int pos_b, int len_b) {
  return std::abs(2 * pos_a + len_a - 2 * pos_b - len_b) <= std::max(len_a, len_b);
}

int ceil_half(int v) { return v >= 0 ? (v + 1) / 2 : -((-v) / 2); }
int floor_half(int v) { return v >= 0 ? v / 2 : -((-v + 1) / 2); }

// Stacks A before B along one axis with a gap and keeps the centers aligned
// within tolerance along the other. Returns (along_a, across_a, along_b, across_b).
std::array<int, 4> place_stacked(int along_extent, int across_extent, int along_a, int across_a,
                                 int along_b, int across_b, int gap, Rng& rng) {
  const int slack = along_extent - along_a - gap - along_b;
  if (slack < 0 || across_a > across_extent || across_b > across_extent)
    throw PlacementInfeasible("sprites too large for the canvas under the placement rule");
  int s0 = uniform_int(rng, 0, slack), s1 = uniform_int(rng, 0, slack);
  if (s0 > s1) std::swap(s0, s1);
  const int pos_a = s0;
  const int pos_b = along_a + gap + s1;

  const int cross_b = uniform_int(rng, 0, across_extent - across_b);
  const int tol2 = std::max(across_a, across_b);
  const int lo = std::max(0, ceil_half(2 * cross_b + across_b - across_a - tol2));
  const int hi = std::min(across_extent - across_a, floor_half(2 * cross_b + across_b - across_a + tol2));
  if (lo > hi) throw PlacementInfeasible("no aligned position for the first sprite");
  const int cross_a = uniform_int(rng, lo, hi);
  return {pos_a, cross_a, pos_b, cross_b};
}

}  // namespace

Placement relation_placement(Relation relation, Size2 canvas, Size2 size_a, Size2 size_b, Rng& rng,
                             const PlacementRules& rules) {
  if (size_a.width <= 0 || size_a.height <= 0 || size_b.width <= 0 || size_b.height <= 0)
    throw PlacementInfeasible("empty sprite box");
  if (size_a.width > canvas.width || size_a.height > canvas.height || size_b.width > canvas.width ||
      size_b.height > canvas.height)
    throw PlacementInfeasible("sprite larger than canvas");

  Placement p;
  switch (relation) {
    case Relation::Above: {
      auto [ya, xa, yb, xb] = place_stacked(canvas.height, canvas.width, size_a.height, size_a.width,
                                            size_b.height, size_b.width, rules.gap_min, rng);
      p.position_a = {xa, ya};
      p.position_b = {xb, yb};
      break;
    }
    case Relation::Beside: {
      auto [xa, ya, xb, yb] = place_stacked(canvas.width, canvas.height, size_a.width, size_a.height,
                                            size_b.width, size_b.height, rules.gap_min, rng);
      p.position_a = {xa, ya};
      p.position_b = {xb, yb};
      break;
    }
    case Relation::Behind: {
      const long inner = static_cast<long>(std::min(size_a.width, size_b.width)) *
                         std::min(size_a.height, size_b.height);
      const long total = static_cast<long>(size_a.width) * size_a.height +
                         static_cast<long>(size_b.width) * size_b.height;
      if (static_cast<double>(inner) / static_cast<double>(total - inner) < rules.behind_iou_min)
        throw PlacementInfeasible("sprite sizes cannot reach the minimum overlap");
      for (int attempt = 0; attempt < rules.max_attempts; ++attempt) {
        const int xb = uniform_int(rng, 0, canvas.width - size_b.width);
        const int yb = uniform_int(rng, 0, canvas.height - size_b.height);
        const int xa_lo = std::max(0, xb - size_a.width + 1);
        const int xa_hi = std::min(canvas.width - size_a.width, xb + size_b.width - 1);
        const int ya_lo = std::max(0, yb - size_a.height + 1);
        const int ya_hi = std::min(canvas.height - size_a.height, yb + size_b.height - 1);
        if (xa_lo > xa_hi || ya_lo > ya_hi) continue;
        const int xa = uniform_int(rng, xa_lo, xa_hi);
        const int ya = uniform_int(rng, ya_lo, ya_hi);
        const double iou = intersection_over_union({xa, ya, size_a.width, size_a.height},
                                                   {xb, yb, size_b.width, size_b.height});
        if (iou >= rules.behind_iou_min && iou <= rules.behind_iou_max) {
          p.position_a = {xa, ya};
          p.position_b = {xb, yb};
          return p;
        }
      }
      throw PlacementInfeasible("no overlapping placement found within the attempt budget");
    }
  }
  p.draw_order = DrawOrder::AThenB;
  return p;
}

bool boxes_satisfy(Relation relation, const Rect& a, const Rect& b, const PlacementRules& rules) {
  switch (relation) {
    case Relation::Above:
      return a.bottom() + rules.gap_min <= b.y && centers_within(a.x, a.w, b.x, b.w);
    case Relation::Beside:
      return a.right() + rules.gap_min <= b.x && centers_within(a.y, a.h, b.y, b.h);
    case Relation::Behind: {
      const double iou = intersection_over_union(a, b);
      return iou >= rules.behind_iou_min && iou <= rules.behind_iou_max;
    }
  }
  return false;
}

bool masks_satisfy(Relation relation, const Mask& a, const Mask& b, const PlacementRules& rules) {
  if (a.width != b.width || a.height != b.height) return false;
  const Rect ra = a.bounds(), rb = b.bounds();
  if (ra.empty() || rb.empty()) return false;
  if (!boxes_satisfy(relation, ra, rb, rules)) return false;
  if (relation == Relation::Behind) {
    for (size_t i = 0; i < a.bits.size(); ++i)
      if (a.bits[i] && b.bits[i]) return true;
    return false;
  }
  return true;
}

RgbaImage transform_sprite(const RgbaImage& sprite, const SpriteTransform& t) {
  if (!(t.scale > 0.0 && t.scale <= 1.0)) throw AssetError("sprite scale must be in (0, 1]");
  const double theta = t.rotation_deg * std::numbers::pi / 180.0;
  double c = std::cos(theta), s = std::sin(theta);
  if (std::abs(c) < 1e-12) c = 0.0;
  if (std::abs(s) < 1e-12) s = 0.0;
  const double sw = sprite.width * t.scale, sh = sprite.height * t.scale;
  const int out_w = static_cast<int>(std::ceil(std::abs(sw * c) + std::abs(sh * s) - 1e-9));
  const int out_h = static_cast<int>(std::ceil(std::abs(sw * s) + std::abs(sh * c) - 1e-9));
  RgbaImage full(std::max(out_w, 1), std::max(out_h, 1));
  const double ocx = full.width / 2.0, ocy = full.height / 2.0;
  const double icx = sprite.width / 2.0, icy = sprite.height / 2.0;
  int x0 = full.width, y0 = full.height, x1 = -1, y1 = -1;
  for (int y = 0; y < full.height; ++y)
    for (int x = 0; x < full.width; ++x) {
      const double dx = x + 0.5 - ocx, dy = y + 0.5 - ocy;
      const double sx = (c * dx + s * dy) / t.scale + icx;
      const double sy = (-s * dx + c * dy) / t.scale + icy;
      const int ix = static_cast<int>(std::floor(sx)), iy = static_cast<int>(std::floor(sy));
      if (ix < 0 || iy < 0 || ix >= sprite.width || iy >= sprite.height) continue;
      const std::uint8_t* src = sprite.pixel(ix, iy);
      if (src[3] < 128) continue;
      std::uint8_t* dst = full.pixel(x, y);
      dst[0] = src[0];
      dst[1] = src[1];
      dst[2] = src[2];
      dst[3] = 255;
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x);
      y1 = std::max(y1, y);
    }
  if (x1 < 0) throw AssetError("sprite vanished under transform");
  RgbaImage out(x1 - x0 + 1, y1 - y0 + 1);
  for (int y = 0; y < out.height; ++y)
    std::copy_n(full.pixel(x0, y0 + y), 4 * out.width, out.pixel(0, y));
  return out;
}

namespace {

void draw_sprite(RgbImage& canvas, Mask& mask, const RgbaImage& sprite, Point2 at) {
  for (int y = 0; y < sprite.height; ++y)
    for (int x = 0; x < sprite.width; ++x) {
      const std::uint8_t* p = sprite.pixel(x, y);
      if (p[3] == 0) continue;
      canvas.set(at.x + x, at.y + y, {p[0], p[1], p[2]});
      mask.set(at.x + x, at.y + y);
    }
}

bool silhouettes_intersect(const RgbaImage& a, Point2 pa, const RgbaImage& b, Point2 pb) {
  const Rect overlap = intersect({pa.x, pa.y, a.width, a.height}, {pb.x, pb.y, b.width, b.height});
  for (int y = overlap.y; y < overlap.bottom(); ++y)
    for (int x = overlap.x; x < overlap.right(); ++x)
      if (a.alpha(x - pa.x, y - pa.y) && b.alpha(x - pb.x, y - pb.y)) return true;
  return false;
}

SpriteTransform effective_transform_a(const SceneSpec& spec) {
  SpriteTransform t = spec.transform_a;
  if (spec.relation == Relation::Behind) t.scale *= spec.rules.behind_depth_scale;
  return t;
}

constexpr int kOcclusionRetries = 64;

}  // namespace

SceneImage compose_scene(const SceneSpec& spec) {
  if (!spec.sprite_a || !spec.sprite_b) throw AssetError("scene spec is missing a sprite");
  validate_sprite(*spec.sprite_a, spec.canvas.width, spec.canvas.height);
  validate_sprite(*spec.sprite_b, spec.canvas.width, spec.canvas.height);
  for (const auto* t : {&spec.transform_a, &spec.transform_b}) {
    if (!(t->rotation_deg >= 0.0 && t->rotation_deg < 360.0))
      throw AssetError("rotation must be in [0, 360)");
  }
  const RgbaImage a = transform_sprite(spec.sprite_a->pixels, effective_transform_a(spec));
  const RgbaImage b = transform_sprite(spec.sprite_b->pixels, spec.transform_b);

  Rng rng(spec.rng_seed);
  Placement placement;
  for (int attempt = 0;; ++attempt) {
    placement = relation_placement(spec.relation, spec.canvas, {a.width, a.height},
                                   {b.width, b.height}, rng, spec.rules);
    if (spec.relation != Relation::Behind ||
        silhouettes_intersect(a, placement.position_a, b, placement.position_b))
      break;
    if (attempt + 1 >= kOcclusionRetries)
      throw PlacementInfeasible("sprite silhouettes never overlap for a behind placement");
  }

  SceneImage scene;
  scene.spec = spec;
  scene.label = spec.relation;
  scene.pixels = RgbImage(spec.canvas.width, spec.canvas.height, spec.background);
  scene.mask_a = Mask(spec.canvas.width, spec.canvas.height);
  scene.mask_b = Mask(spec.canvas.width, spec.canvas.height);
  if (placement.draw_order == DrawOrder::AThenB) {
    draw_sprite(scene.pixels, scene.mask_a, a, placement.position_a);
    draw_sprite(scene.pixels, scene.mask_b, b, placement.position_b);
  } else {
    draw_sprite(scene.pixels, scene.mask_b, b, placement.position_b);
    draw_sprite(scene.pixels, scene.mask_a, a, placement.position_a);
  }
  scene.bbox_a = {placement.position_a.x, placement.position_a.y, a.width, a.height};
  scene.bbox_b = {placement.position_b.x, placement.position_b.y, b.width, b.height};
  return scene;
}

SynthConfig::SynthConfig()
    : train_backgrounds{{173, 216, 230}, {144, 238, 144}, {255, 228, 196}, {255, 182, 193},
                        {230, 230, 250}, {255, 255, 204}, {250, 128, 114}, {175, 238, 238}},
      test_backgrounds{{255, 218, 185}, {221, 160, 221}, {240, 230, 140}, {127, 255, 212}} {}

void validate_synth_config(const SynthConfig& config, const SpriteLibrary& library) {
  auto fail = [](const std::string& m) { throw DataError("infeasible dataset config: " + m); };
  if (config.train_objects.size() < 2 || config.test_objects.size() < 2)
    fail("each split needs at least 2 distinct objects");
  std::set<std::string> train(config.train_objects.begin(), config.train_objects.end());
  std::set<std::string> test(config.test_objects.begin(), config.test_objects.end());
  if (train.size() != config.train_objects.size() || test.size() != config.test_objects.size())
    fail("duplicate object ids");
  for (const auto& o : test)
    if (train.contains(o)) fail("object '" + o + "' is in both splits");
  for (const auto& o : config.train_objects)
    if (!library.contains(o)) fail("no sprites for object '" + o + "'");
  for (const auto& o : config.test_objects)
    if (!library.contains(o)) fail("no sprites for object '" + o + "'");
  if (config.train_backgrounds.empty() || config.test_backgrounds.empty()) fail("empty background palette");
  for (const auto& c : config.train_backgrounds)
    if (std::find(config.test_backgrounds.begin(), config.test_backgrounds.end(), c) !=
        config.test_backgrounds.end())
      fail("background palettes overlap");
  if (config.train_count < 0 || config.test_count < 0) fail("negative image count");
  if (config.rotations.empty()) fail("empty rotation set");
  if (!(config.scale_min > 0.0 && config.scale_min <= config.scale_max && config.scale_max <= 1.0))
    fail("scale range must satisfy 0 < min <= max <= 1");
  if (config.canvas.width < 16 || config.canvas.height < 16) fail("canvas too small");
}

namespace {

double normalize_degrees(double deg) {
  double r = std::fmod(deg, 360.0);
  if (r < 0) r += 360.0;
  if (r >= 360.0) r -= 360.0;
  return r;
}

// Largest box IoU reachable by two boxes of these sizes.
double max_iou(Size2 a, Size2 b) {
  const double inner = static_cast<double>(std::min(a.width, b.width)) * std::min(a.height, b.height);
  return inner / (static_cast<double>(a.width) * a.height + static_cast<double>(b.width) * b.height - inner);
}

bool comfortably_feasible(const SceneSpec& s) {
  const RgbaImage a = transform_sprite(s.sprite_a->pixels, effective_transform_a(s));
  const RgbaImage b = transform_sprite(s.sprite_b->pixels, s.transform_b);
  const Size2 sa{a.width, a.height}, sb{b.width, b.height};
  if (s.relation == Relation::Behind) return max_iou(sa, sb) >= s.rules.behind_iou_min + 0.1;
  if (s.relation == Relation::Above) return sa.height + sb.height + s.rules.gap_min <= s.canvas.height;
  return sa.width + sb.width + s.rules.gap_min <= s.canvas.width;
}

constexpr int kResampleLimit = 200;

}  // namespace

std::vector<SceneSpec> plan_split(const SynthConfig& config, const SpriteLibrary& library,
                                  std::uint64_t seed, bool train) {
  const auto& objects = train ? config.train_objects : config.test_objects;
  const auto& palette = train ? config.train_backgrounds : config.test_backgrounds;
  const int count = train ? config.train_count : config.test_count;
  const int n_obj = static_cast<int>(objects.size());
  const int cells = n_obj * n_obj * kNumRelations;

  std::vector<SceneSpec> specs;
  specs.reserve(count);
  for (int n = 0; n < count; ++n) {
    Rng rng = make_rng(seed, train ? "train" : "test", static_cast<std::uint64_t>(n));
    const int cell = n % cells;
    const int pair = cell / kNumRelations;
    SceneSpec s;
    s.relation = relation_from_index(cell % kNumRelations);
    s.canvas = config.canvas;
    s.rules = config.rules;
    const auto& va = library.variants(objects[pair / n_obj]);
    const auto& vb = library.variants(objects[pair % n_obj]);
    for (int attempt = 0;; ++attempt) {
      s.sprite_a = va[uniform_int(rng, 0, static_cast<int>(va.size()) - 1)];
      s.sprite_b = vb[uniform_int(rng, 0, static_cast<int>(vb.size()) - 1)];
      s.background = palette[uniform_int(rng, 0, static_cast<int>(palette.size()) - 1)];
      for (auto* t : {&s.transform_a, &s.transform_b}) {
        t->rotation_deg = normalize_degrees(
            config.rotations[uniform_int(rng, 0, static_cast<int>(config.rotations.size()) - 1)]);
        t->scale = uniform_real(rng, config.scale_min, config.scale_max);
      }
      if (comfortably_feasible(s)) break;
      if (attempt + 1 >= kResampleLimit)
        throw DataError("cannot find a feasible " + std::string(relation_name(s.relation)) +
                        " scene for objects " + objects[pair / n_obj] + "/" + objects[pair % n_obj]);
    }
    s.rng_seed = rng();
    specs.push_back(std::move(s));
  }
  return specs;
}

std::string mask_file(const std::string& image_file, char which) {
  std::string stem = image_file;
  if (stem.size() >= 4 && stem.compare(stem.size() - 4, 4, ".png") == 0) stem.resize(stem.size() - 4);
  return stem + ".mask_" + which + ".png";
}

namespace {

ManifestEntry entry_for(const SceneImage& scene, std::string file) {
  ManifestEntry e;
  e.file = std::move(file);
  e.label = scene.label;
  e.object_a = scene.spec.sprite_a->object;
  e.object_b = scene.spec.sprite_b->object;
  e.variant_a = scene.spec.sprite_a->variant;
  e.variant_b = scene.spec.sprite_b->variant;
  e.bbox_a = scene.bbox_a;
  e.bbox_b = scene.bbox_b;
  e.background = scene.spec.background;
  e.transform_a = scene.spec.transform_a;
  e.transform_b = scene.spec.transform_b;
  e.scene_seed = scene.spec.rng_seed;
  return e;
}

std::string image_name(const char* split, int n) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s/%06d.png", split, n);
  return buf;
}

}  // namespace

DatasetManifest generate_dataset(const SynthConfig& config, std::uint64_t seed,
                                 const std::filesystem::path& root, int workers) {
  namespace fs = std::filesystem;
  const SpriteLibrary library =
      config.sprite_dir.empty() ? SpriteLibrary::procedural() : SpriteLibrary::from_directory(config.sprite_dir);
  validate_synth_config(config, library);

  std::error_code ec;
  for (const char* split : {"train", "test"}) {
    fs::create_directories(root / split, ec);
    if (ec) throw IoError("cannot create " + (root / split).string() + ": " + ec.message());
  }

  DatasetManifest manifest;
  manifest.seed = seed;
  manifest.canvas = config.canvas;
  manifest.rules = config.rules;
  manifest.sprite_dir = config.sprite_dir;
  manifest.train_objects = config.train_objects;
  manifest.test_objects = config.test_objects;
  manifest.train_backgrounds = config.train_backgrounds;
  manifest.test_backgrounds = config.test_backgrounds;

  for (bool train : {true, false}) {
    const std::vector<SceneSpec> specs = plan_split(config, library, seed, train);
    auto& entries = train ? manifest.train : manifest.test;
    entries.resize(specs.size());
    const char* split = train ? "train" : "test";
    parallel_for(specs.size(), workers, [&](std::size_t i) {
      const SceneImage scene = compose_scene(specs[i]);
      if (!masks_satisfy(scene.label, scene.mask_a, scene.mask_b, scene.spec.rules))
        throw DataError("generated scene violates its relation predicate");
      const std::string file = image_name(split, static_cast<int>(i));
      write_file_atomic(root / file, encode_png(scene.pixels));
      write_file_atomic(root / mask_file(file, 'a'), encode_png(scene.mask_a));
      write_file_atomic(root / mask_file(file, 'b'), encode_png(scene.mask_b));
      entries[i] = entry_for(scene, file);
    });
  }
  write_file_atomic(root / "manifest.json", manifest_to_json(manifest));
  return manifest;
}

namespace {

using nlohmann::json;

json rect_json(const Rect& r) { return json::array({r.x, r.y, r.w, r.h}); }
Rect rect_from(const json& j) { return {j.at(0).get<int>(), j.at(1).get<int>(), j.at(2).get<int>(), j.at(3).get<int>()}; }
json rgb_json(Rgb c) { return json::array({c.r, c.g, c.b}); }
Rgb rgb_from(const json& j) {
  return {j.at(0).get<std::uint8_t>(), j.at(1).get<std::uint8_t>(), j.at(2).get<std::uint8_t>()};
}

json entry_json(const ManifestEntry& e) {
  return json{{"file", e.file},
              {"label", relation_name(e.label)},
              {"object_a", e.object_a},
              {"object_b", e.object_b},
              {"variant_a", e.variant_a},
              {"variant_b", e.variant_b},
              {"bbox_a", rect_json(e.bbox_a)},
              {"bbox_b", rect_json(e.bbox_b)},
              {"background", rgb_json(e.background)},
              {"rotation_a", e.transform_a.rotation_deg},
              {"rotation_b", e.transform_b.rotation_deg},
              {"scale_a", e.transform_a.scale},
              {"scale_b", e.transform_b.scale},
              {"scene_seed", e.scene_seed}};
}

ManifestEntry entry_from(const json& j) {
  ManifestEntry e;
  e.file = j.at("file").get<std::string>();
  const auto label = parse_relation(j.at("label").get<std::string>());
  if (!label) throw FormatError("unknown relation label in manifest");
  e.label = *label;
  e.object_a = j.at("object_a").get<std::string>();
  e.object_b = j.at("object_b").get<std::string>();
  e.variant_a = j.at("variant_a").get<int>();
  e.variant_b = j.at("variant_b").get<int>();
  e.bbox_a = rect_from(j.at("bbox_a"));
  e.bbox_b = rect_from(j.at("bbox_b"));
  e.background = rgb_from(j.at("background"));
  e.transform_a = {j.at("rotation_a").get<double>(), j.at("scale_a").get<double>()};
  e.transform_b = {j.at("rotation_b").get<double>(), j.at("scale_b").get<double>()};
  e.scene_seed = j.at("scene_seed").get<std::uint64_t>();
  return e;
}

}  // namespace

std::string manifest_to_json(const DatasetManifest& m) {
  json palette_train = json::array(), palette_test = json::array();
  for (Rgb c : m.train_backgrounds) palette_train.push_back(rgb_json(c));
  for (Rgb c : m.test_backgrounds) palette_test.push_back(rgb_json(c));
  json train = json::array(), test = json::array();
  for (const auto& e : m.train) train.push_back(entry_json(e));
  for (const auto& e : m.test) test.push_back(entry_json(e));
  json j{{"schema_version", m.schema_version},
         {"seed", m.seed},
         {"generator",
          {{"canvas", json::array({m.canvas.width, m.canvas.height})},
           {"gap_min", m.rules.gap_min},
           {"behind_iou_min", m.rules.behind_iou_min},
           {"behind_iou_max", m.rules.behind_iou_max},
           {"behind_depth_scale", m.rules.behind_depth_scale},
           {"max_attempts", m.rules.max_attempts},
           {"sprite_dir", m.sprite_dir}}},
         {"object_sets", {{"train", m.train_objects}, {"test", m.test_objects}}},
         {"background_palettes", {{"train", palette_train}, {"test", palette_test}}},
         {"splits", {{"train", train}, {"test", test}}}};
  return j.dump(1) + "\n";
}

DatasetManifest manifest_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    DatasetManifest m;
    m.schema_version = j.at("schema_version").get<int>();
    if (m.schema_version != 1) throw FormatError("unsupported manifest schema_version");
    m.seed = j.at("seed").get<std::uint64_t>();
    const json& g = j.at("generator");
    m.canvas = {g.at("canvas").at(0).get<int>(), g.at("canvas").at(1).get<int>()};
    m.rules.gap_min = g.at("gap_min").get<int>();
    m.rules.behind_iou_min = g.at("behind_iou_min").get<double>();
    m.rules.behind_iou_max = g.at("behind_iou_max").get<double>();
    m.rules.behind_depth_scale = g.at("behind_depth_scale").get<double>();
    m.rules.max_attempts = g.at("max_attempts").get<int>();
    m.sprite_dir = g.at("sprite_dir").get<std::string>();
    m.train_objects = j.at("object_sets").at("train").get<std::vector<std::string>>();
    m.test_objects = j.at("object_sets").at("test").get<std::vector<std::string>>();
    for (const auto& c : j.at("background_palettes").at("train")) m.train_backgrounds.push_back(rgb_from(c));
    for (const auto& c : j.at("background_palettes").at("test")) m.test_backgrounds.push_back(rgb_from(c));
    for (const auto& e : j.at("splits").at("train")) m.train.push_back(entry_from(e));
    for (const auto& e : j.at("splits").at("test")) m.test.push_back(entry_from(e));
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed manifest: ") + e.what());
  }
}

DatasetManifest load_manifest(const std::filesystem::path& root) {
  const auto bytes = read_file(root / "manifest.json");
  return manifest_from_json(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

SpriteLibrary library_for(const DatasetManifest& manifest) {
  return manifest.sprite_dir.empty() ? SpriteLibrary::procedural()
                                     : SpriteLibrary::from_directory(manifest.sprite_dir);
}

SceneSpec spec_from_entry(const DatasetManifest& manifest, const ManifestEntry& entry,
                          const SpriteLibrary& library) {
  auto find = [&](const std::string& object, int variant) {
    for (const auto& s : library.variants(object))
      if (s->variant == variant) return s;
    throw AssetError("missing sprite " + object + "/" + std::to_string(variant));
  };
  SceneSpec s;
  s.sprite_a = find(entry.object_a, entry.variant_a);
  s.sprite_b = find(entry.object_b, entry.variant_b);
  s.relation = entry.label;
  s.background = entry.background;
  s.transform_a = entry.transform_a;
  s.transform_b = entry.transform_b;
  s.rng_seed = entry.scene_seed;
  s.canvas = manifest.canvas;
  s.rules = manifest.rules;
  return s;
}

}  // namespace relscope
