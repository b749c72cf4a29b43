#include "relscope/influence.hpp"

#include "relscope/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace relscope {

std::string_view sign_name(InfluenceSign s) {
  switch (s) {
    case InfluenceSign::Positive:
      return "positive";
    case InfluenceSign::Negative:
      return "negative";
    case InfluenceSign::Zero:
      return "zero";
  }
  return "?";
}

Influence influence(double baseline_ce, double modified_ce) {
  if (!std::isfinite(baseline_ce) || !std::isfinite(modified_ce))
    throw NumericError("influence of a non-finite cross entropy");
  const double e = modified_ce - baseline_ce;
  return {e, e > 0.0 ? InfluenceSign::Positive : e < 0.0 ? InfluenceSign::Negative : InfluenceSign::Zero};
}

void OcclusionConfig::validate(int image_width, int image_height) const {
  if (mask_width < 1 || mask_height < 1) throw UsageError("mask size must be positive");
  if (step < 1) throw UsageError("step must be >= 1");
  if (mask_width > image_width || mask_height > image_height) throw UsageError("mask does not fit the image");
}

double InfluenceMap::min_influence() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& r : records) m = std::min(m, r.influence);
  return m;
}

double InfluenceMap::max_influence() const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& r : records) m = std::max(m, r.influence);
  return m;
}

std::vector<Rect> occlusion_grid(int image_width, int image_height, const OcclusionConfig& config, int* rows,
                                 int* cols) {
  config.validate(image_width, image_height);
  const int nc = (image_width - config.mask_width) / config.step + 1;
  const int nr = (image_height - config.mask_height) / config.step + 1;
  std::vector<Rect> cells;
  cells.reserve(static_cast<size_t>(nr) * nc);
  for (int r = 0; r < nr; ++r)
    for (int c = 0; c < nc; ++c) cells.push_back({c * config.step, r * config.step, config.mask_width, config.mask_height});
  if (rows) *rows = nr;
  if (cols) *cols = nc;
  return cells;
}

double image_cross_entropy(const RgbImage& image, const FeatureExtractor& extractor, const Model& model,
                           int true_label) {
  const FeatureVector f = extractor.extract(image);
  if (true_label < 0 || true_label >= model.num_classes()) throw DataError("label out of range");
  const auto pass = forward(model, f.transpose());
  return cross_entropy_logits(pass.logits.row(0), true_label);
}

InfluenceMap occlusion_scan(const RgbImage& image, const FeatureExtractor& extractor, const Model& model,
                            int true_label, const OcclusionConfig& config, int workers) {
  if (!extractor.supports_images())
    throw UnsupportedConfiguration("occlusion scans need an image-level extractor; external features cannot be re-extracted");
  if (extractor.output_dim() != model.input_dim())
    throw DimensionError("extractor output does not match model input");
  InfluenceMap map;
  map.image_width = image.width;
  map.image_height = image.height;
  const std::vector<Rect> cells = occlusion_grid(image.width, image.height, config, &map.rows, &map.cols);
  map.baseline_ce = image_cross_entropy(image, extractor, model, true_label);
  map.records.resize(cells.size());
  parallel_for(cells.size(), workers, [&](std::size_t j) {
    RgbImage masked = image;
    masked.fill_rect(cells[j], config.mask_color);
    const double ce = image_cross_entropy(masked, extractor, model, true_label);
    const Influence e = influence(map.baseline_ce, ce);
    map.records[j] = {static_cast<int>(j), cells[j], ce, e.value, e.sign};
  });
  return map;
}

RegionSet important_regions(const InfluenceMap& map, double threshold) {
  if (map.records.empty()) throw DataError("empty influence map");
  RegionSet set;
  set.threshold = threshold;
  for (const auto& r : map.records) {
    if (r.influence > threshold) set.regions.push_back(r.index);
    if (r.influence > map.records[static_cast<size_t>(set.important)].influence) set.important = r.index;
  }
  return set;
}

Rect band_between(const Rect& a, const Rect& b) {
  auto axis = [](int a0, int a1, int b0, int b1) -> std::pair<int, int> {
    const int lo = std::max(a0, b0), hi = std::min(a1, b1);
    if (lo < hi) return {lo, hi};
    return {std::min(a1, b1), std::max(a0, b0)};
  };
  const auto [x0, x1] = axis(a.x, a.right(), b.x, b.right());
  const auto [y0, y1] = axis(a.y, a.bottom(), b.y, b.bottom());
  return {x0, y0, x1 - x0, y1 - y0};
}

std::vector<bool> relation_cells(const InfluenceMap& map, const Mask& mask_a, const Mask& mask_b) {
  const Rect band = band_between(mask_a.bounds(), mask_b.bounds());
  std::vector<bool> flagged(map.records.size(), false);
  for (size_t j = 0; j < map.records.size(); ++j) {
    const Rect& cell = map.records[j].region;
    if (!intersect(cell, band).empty()) {
      flagged[j] = true;
      continue;
    }
    for (int y = cell.y; y < cell.bottom() && !flagged[j]; ++y)
      for (int x = cell.x; x < cell.right(); ++x)
        if (mask_a.at(x, y) || mask_b.at(x, y)) {
          flagged[j] = true;
          break;
        }
  }
  return flagged;
}

double localization_contrast(const std::vector<double>& values, const std::vector<bool>& flagged) {
  double in = 0.0, out = 0.0;
  long n_in = 0, n_out = 0;
  for (size_t j = 0; j < values.size(); ++j) {
    if (flagged[j]) {
      in += values[j];
      ++n_in;
    } else {
      out += values[j];
      ++n_out;
    }
  }
  if (n_in == 0 || n_out == 0) return std::numeric_limits<double>::quiet_NaN();
  return in / static_cast<double>(n_in) - out / static_cast<double>(n_out);
}

double localization_contrast(const InfluenceMap& map, const std::vector<bool>& flagged) {
  std::vector<double> values;
  values.reserve(map.records.size());
  for (const auto& r : map.records) values.push_back(r.influence);
  return localization_contrast(values, flagged);
}

double permutation_quantile(const std::vector<double>& values, const std::vector<bool>& flagged, int shuffles,
                            double q, std::uint64_t seed) {
  if (shuffles < 1) throw UsageError("shuffles must be >= 1");
  Rng rng(seed);
  std::vector<double> perm = values;
  std::vector<double> stats(static_cast<size_t>(shuffles));
  for (auto& s : stats) {
    std::shuffle(perm.begin(), perm.end(), rng);
    s = localization_contrast(perm, flagged);
  }
  std::sort(stats.begin(), stats.end());
  const auto rank = static_cast<size_t>(std::ceil(q * static_cast<double>(shuffles) - 1e-9));
  return stats[std::clamp<size_t>(rank, 1, stats.size()) - 1];
}

std::string influence_csv(const InfluenceMap& map) {
  std::string out = "region_index,x,y,w,h,C_j,E_j,sign\n";
  char line[256];
  for (const auto& r : map.records) {
    std::snprintf(line, sizeof line, "%d,%d,%d,%d,%d,%.17g,%.17g,%s\n", r.index, r.region.x, r.region.y,
                  r.region.w, r.region.h, r.masked_ce, r.influence, std::string(sign_name(r.sign)).c_str());
    out += line;
  }
  return out;
}

std::string scan_summary_json(const InfluenceMap& map, const RegionSet& regions) {
  const auto& top = map.records.at(static_cast<size_t>(regions.important));
  nlohmann::json j{{"baseline_ce", map.baseline_ce},
                   {"grid", {{"rows", map.rows}, {"cols", map.cols}, {"regions", map.size()}}},
                   {"argmax_region",
                    {{"index", top.index},
                     {"rect", {top.region.x, top.region.y, top.region.w, top.region.h}},
                     {"E", top.influence}}},
                   {"min_E", map.min_influence()},
                   {"max_E", map.max_influence()},
                   {"threshold", regions.threshold},
                   {"regions_above_threshold", regions.regions}};
  return j.dump(1) + "\n";
}

}  // namespace relscope
