#ifndef RELSCOPE_SYNTH_HPP
#define RELSCOPE_SYNTH_HPP

#include "relscope/common.hpp"
#include "relscope/image.hpp"
#include "relscope/rng.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace relscope {

struct SpriteAsset {
  std::string id;      // "<object>/<variant>"
  std::string object;  // object class, e.g. "dog"
  int variant = 0;
  RgbaImage pixels;    // alpha is binary: 0 or 255

  int width() const { return pixels.width; }
  int height() const { return pixels.height; }
};

// Throws AssetError when the sprite has no opaque pixel or does not fit
// strictly inside the canvas.
void validate_sprite(const SpriteAsset& sprite, int canvas_width, int canvas_height);

// Per-object pool of sprite variants.
class SpriteLibrary {
 public:
  // Procedurally drawn shapes for the built-in object classes. Deterministic.
  static SpriteLibrary procedural();
  // Loads <dir>/<object>/*.png (RGBA, alpha binarized at 128). Objects not
  // present on disk fall back to procedural sprites.
  static SpriteLibrary from_directory(const std::filesystem::path& dir);

  void add(SpriteAsset sprite);
  bool contains(const std::string& object) const { return pool_.contains(object); }
  const std::vector<std::shared_ptr<const SpriteAsset>>& variants(const std::string& object) const;
  std::vector<std::string> objects() const;

 private:
  std::map<std::string, std::vector<std::shared_ptr<const SpriteAsset>>> pool_;
};

// Object classes the procedural library knows how to draw.
const std::vector<std::string>& builtin_train_objects();
const std::vector<std::string>& builtin_test_objects();
RgbaImage draw_procedural_sprite(const std::string& object, int variant);
int procedural_variant_count(const std::string& object);

struct PlacementRules {
  int gap_min = 8;                    // px between boxes for above/beside
  double behind_iou_min = 0.25;
  double behind_iou_max = 0.6;
  double behind_depth_scale = 0.85;   // extra scale on the occluded sprite; 1 disables
  int max_attempts = 2000;
};

struct Size2 {
  int width = 0, height = 0;
};

struct Point2 {
  int x = 0, y = 0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

enum class DrawOrder { AThenB, BThenA };

struct Placement {
  Point2 position_a, position_b;  // top-left corners of the tight boxes
  DrawOrder draw_order = DrawOrder::AThenB;
};

// Samples positions for two boxes realizing `relation` on the canvas.
//   Above:  A above B, vertical gap >= gap_min, |center_x(A) - center_x(B)| <= max(w)/2
//   Beside: A left of B, horizontal gap >= gap_min, |center_y(A) - center_y(B)| <= max(h)/2
//   Behind: box IoU in [iou_min, iou_max], A drawn first and occluded by B
// Throws PlacementInfeasible when the rule cannot be met on the canvas.
Placement relation_placement(Relation relation, Size2 canvas, Size2 size_a, Size2 size_b, Rng& rng,
                             const PlacementRules& rules = {});

// Box-level predicate of a relation, as enforced by relation_placement.
bool boxes_satisfy(Relation relation, const Rect& a, const Rect& b, const PlacementRules& rules = {});

struct SpriteTransform {
  double rotation_deg = 0.0;  // [0, 360)
  double scale = 1.0;         // (0, 1]
};

// Scales then rotates a sprite about its center (nearest neighbour) and crops
// to the tight alpha box.
RgbaImage transform_sprite(const RgbaImage& sprite, const SpriteTransform& t);

struct SceneSpec {
  std::shared_ptr<const SpriteAsset> sprite_a;
  std::shared_ptr<const SpriteAsset> sprite_b;
  Relation relation = Relation::Above;
  Rgb background;
  SpriteTransform transform_a, transform_b;
  std::uint64_t rng_seed = 0;
  Size2 canvas{224, 224};
  PlacementRules rules;
};

struct SceneImage {
  RgbImage pixels;
  Mask mask_a, mask_b;
  Rect bbox_a, bbox_b;
  Relation label = Relation::Above;
  SceneSpec spec;
};

// Background fill, then the two sprites composited in draw order. Output is a
// pure function of the SceneSpec.
SceneImage compose_scene(const SceneSpec& spec);

// The relation's geometric predicate evaluated on recorded masks.
bool masks_satisfy(Relation relation, const Mask& a, const Mask& b, const PlacementRules& rules = {});

struct SynthConfig {
  Size2 canvas{224, 224};
  int train_count = 2628;
  int test_count = 432;
  std::vector<std::string> train_objects = builtin_train_objects();
  std::vector<std::string> test_objects = builtin_test_objects();
  std::vector<Rgb> train_backgrounds;
  std::vector<Rgb> test_backgrounds;
  std::vector<double> rotations{0.0, 15.0, -15.0, 30.0, -30.0, 90.0};
  double scale_min = 0.75;
  double scale_max = 1.0;
  PlacementRules rules;
  std::string sprite_dir;  // empty: procedural sprites

  SynthConfig();
};

struct ManifestEntry {
  std::string file;  // relative to dataset root
  Relation label = Relation::Above;
  std::string object_a, object_b;
  int variant_a = 0, variant_b = 0;
  Rect bbox_a, bbox_b;
  Rgb background;
  SpriteTransform transform_a, transform_b;
  std::uint64_t scene_seed = 0;
};

struct DatasetManifest {
  int schema_version = 1;
  std::uint64_t seed = 0;
  Size2 canvas{224, 224};
  PlacementRules rules;
  std::string sprite_dir;
  std::vector<std::string> train_objects, test_objects;
  std::vector<Rgb> train_backgrounds, test_backgrounds;
  std::vector<ManifestEntry> train, test;
};

// Validates the config (disjoint pools/palettes, enough objects, sprites fit)
// and throws DataError when it is infeasible.
void validate_synth_config(const SynthConfig& config, const SpriteLibrary& library);

// Scene specs for one split, in file order. Pure function of (config, seed).
std::vector<SceneSpec> plan_split(const SynthConfig& config, const SpriteLibrary& library,
                                  std::uint64_t seed, bool train);

// Renders every scene and writes <root>/{train,test}/NNNNNN.png with
// .mask_a.png/.mask_b.png sidecars plus <root>/manifest.json.
DatasetManifest generate_dataset(const SynthConfig& config, std::uint64_t seed,
                                 const std::filesystem::path& root, int workers = 1);

std::string manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(std::string_view json);
DatasetManifest load_manifest(const std::filesystem::path& root);

// Rebuilds the scene spec recorded by a manifest entry.
SceneSpec spec_from_entry(const DatasetManifest& manifest, const ManifestEntry& entry,
                          const SpriteLibrary& library);
SpriteLibrary library_for(const DatasetManifest& manifest);

// Basename of the mask sidecars for an image file ("train/000001.png" ->
// "train/000001.mask_a.png").
std::string mask_file(const std::string& image_file, char which);

}  // namespace relscope

#endif  // RELSCOPE_SYNTH_HPP
