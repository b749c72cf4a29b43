#ifndef RELSCOPE_INFLUENCE_HPP
#define RELSCOPE_INFLUENCE_HPP

#include "relscope/features.hpp"
#include "relscope/image.hpp"
#include "relscope/mlp.hpp"
#include "relscope/rng.hpp"

#include <string>
#include <vector>

namespace relscope {

enum class InfluenceSign { Positive, Negative, Zero };

std::string_view sign_name(InfluenceSign s);

struct Influence {
  double value = 0.0;  // modified - baseline cross entropy
  InfluenceSign sign = InfluenceSign::Zero;
};

// E = modified_C - baseline_C. Positive E: the modification made the true
// label less likely, i.e. the removed content supported it.
Influence influence(double baseline_ce, double modified_ce);

struct OcclusionConfig {
  int mask_width = 16;
  int mask_height = 16;
  int step = 16;
  Rgb mask_color{128, 128, 128};

  void validate(int image_width, int image_height) const;
};

struct InfluenceRecord {
  int index = 0;
  Rect region;
  double masked_ce = 0.0;
  double influence = 0.0;
  InfluenceSign sign = InfluenceSign::Zero;
};

struct InfluenceMap {
  int image_width = 0, image_height = 0;
  double baseline_ce = 0.0;
  int rows = 0, cols = 0;
  std::vector<InfluenceRecord> records;  // row-major from the top-left cell

  int size() const { return static_cast<int>(records.size()); }
  const InfluenceRecord& at(int row, int col) const { return records[static_cast<size_t>(row * cols + col)]; }
  double min_influence() const;
  double max_influence() const;
};

// Mask rectangles in scan order. Partial cells at the right/bottom edges are
// dropped.
std::vector<Rect> occlusion_grid(int image_width, int image_height, const OcclusionConfig& config,
                                 int* rows = nullptr, int* cols = nullptr);

// Cross entropy of one image against a label through extractor and model.
double image_cross_entropy(const RgbImage& image, const FeatureExtractor& extractor, const Model& model,
                           int true_label);

// Masks every grid cell in turn and records E for each masked image. The
// masked evaluations run on up to `workers` threads; the result does not
// depend on the worker count.
InfluenceMap occlusion_scan(const RgbImage& image, const FeatureExtractor& extractor, const Model& model,
                            int true_label, const OcclusionConfig& config, int workers = 1);

struct RegionSet {
  double threshold = 0.0;
  std::vector<int> regions;  // indices with E > threshold, ascending
  int important = 0;         // argmax E, lowest index on ties
};

RegionSet important_regions(const InfluenceMap& map, double threshold);

// Axis-aligned band between two boxes: per axis, their overlap if they
// overlap, otherwise the gap between them.
Rect band_between(const Rect& a, const Rect& b);

// Cells whose rectangle touches mask_a, mask_b, or the band between their
// bounding boxes.
std::vector<bool> relation_cells(const InfluenceMap& map, const Mask& mask_a, const Mask& mask_b);

// mean E over flagged cells minus mean E over the others (NaN if either side
// is empty).
double localization_contrast(const InfluenceMap& map, const std::vector<bool>& flagged);
double localization_contrast(const std::vector<double>& values, const std::vector<bool>& flagged);

// Nearest-rank q-quantile of the contrast under `shuffles` random permutations
// of the cell values (flagged set held fixed).
double permutation_quantile(const std::vector<double>& values, const std::vector<bool>& flagged, int shuffles,
                            double q, std::uint64_t seed);

// CSV: region_index,x,y,w,h,C_j,E_j,sign
std::string influence_csv(const InfluenceMap& map);
// JSON: baseline C, grid dims, argmax region, threshold results.
std::string scan_summary_json(const InfluenceMap& map, const RegionSet& regions);

struct HeatmapOptions {
  double alpha = 0.5;
  bool smooth = false;
  int legend_height = 24;
};

// 0 -> blue, 0.5 -> green, 1 -> red (jet).
Rgb jet_color(double t);

// Blends a per-image linear colour scale (min E blue, max E red) over the
// image and appends a legend strip labelled with the numeric min and max.
// A constant map renders at mid-scale.
RgbImage render_heatmap(const InfluenceMap& map, const RgbImage& image, const HeatmapOptions& options = {});

}  // namespace relscope

#endif  // RELSCOPE_INFLUENCE_HPP
