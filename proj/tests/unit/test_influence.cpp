#include "relscope/influence.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace relscope;

namespace {

ExtractorSpec raw_spec(int grid) {
  ExtractorSpec s;
  s.kind = ExtractorKind::RawDownsample;
  s.input_size = 224;
  s.grid_rows = s.grid_cols = grid;
  s.output_dim = 3 * grid * grid;
  return s;
}

InfluenceMap map_of(const std::vector<double>& e, int cols) {
  InfluenceMap m;
  m.cols = cols;
  m.rows = static_cast<int>(e.size()) / cols;
  for (size_t i = 0; i < e.size(); ++i)
    m.records.push_back({static_cast<int>(i), {static_cast<int>(i % cols) * 16, static_cast<int>(i / cols) * 16, 16, 16},
                         0.0, e[i], e[i] > 0 ? InfluenceSign::Positive : InfluenceSign::Zero});
  return m;
}

}  // namespace

TEST_CASE("default grid on a 224 image has 196 cells") {
  int rows = 0, cols = 0;
  const auto grid = occlusion_grid(224, 224, OcclusionConfig{}, &rows, &cols);
  CHECK(grid.size() == 196);
  CHECK(rows == 14);
  CHECK(cols == 14);
  CHECK(grid.front() == Rect{0, 0, 16, 16});
  CHECK(grid[1] == Rect{16, 0, 16, 16});
  CHECK(grid.back() == Rect{208, 208, 16, 16});
}

TEST_CASE("partial edge cells are dropped and bad configs rejected") {
  OcclusionConfig c;
  c.step = 20;
  CHECK(occlusion_grid(224, 224, c).size() == 11 * 11);
  c.mask_width = 300;
  CHECK_THROWS(occlusion_grid(224, 224, c));
  c = {};
  c.step = 0;
  CHECK_THROWS(occlusion_grid(224, 224, c));
}

TEST_CASE("influence sign follows the difference") {
  CHECK(influence(1.5, 1.5).value == 0.0);
  CHECK(influence(1.5, 1.5).sign == InfluenceSign::Zero);
  CHECK(influence(1.0, 2.0).sign == InfluenceSign::Positive);
  CHECK(influence(2.0, 1.0).value == doctest::Approx(-1.0));
  CHECK(influence(2.0, 1.0).sign == InfluenceSign::Negative);
}

TEST_CASE("important regions break ties toward the lowest index") {
  const InfluenceMap m = map_of({0.1, 0.5, -0.2, 0.5}, 2);
  const RegionSet r = important_regions(m, 0.0);
  CHECK(r.important == 1);
  CHECK(r.regions == std::vector<int>{0, 1, 3});
  CHECK(important_regions(m, 0.3).regions == std::vector<int>{1, 3});
  const InfluenceMap flat = map_of({0.0, 0.0, 0.0, 0.0}, 2);
  CHECK(important_regions(flat, 0.0).regions.empty());
  CHECK(important_regions(flat, 0.0).important == 0);
}

TEST_CASE("band between boxes covers the gap or the overlap") {
  CHECK(band_between({0, 0, 10, 10}, {0, 20, 10, 10}) == Rect{0, 10, 10, 10});
  CHECK(band_between({0, 0, 10, 10}, {30, 2, 10, 10}) == Rect{10, 2, 20, 8});
  CHECK(band_between({0, 0, 10, 10}, {5, 5, 10, 10}) == Rect{5, 5, 5, 5});
}

TEST_CASE("relation cells flag masks and the band") {
  int rows = 0, cols = 0;
  InfluenceMap m;
  for (const Rect& r : occlusion_grid(224, 224, OcclusionConfig{}, &rows, &cols))
    m.records.push_back({static_cast<int>(m.records.size()), r, 0, 0, InfluenceSign::Zero});
  m.rows = rows;
  m.cols = cols;
  Mask a(224, 224), b(224, 224);
  a.set(20, 20);
  b.set(20, 60);
  const auto f = relation_cells(m, a, b);
  CHECK(std::count(f.begin(), f.end(), true) == 3);
  CHECK(f[15]);
  CHECK(f[29]);
  CHECK(f[43]);
}

TEST_CASE("localization contrast") {
  CHECK(localization_contrast(std::vector<double>{3, 1, 1, 1}, {true, false, false, false}) == doctest::Approx(2.0));
  CHECK(std::isnan(localization_contrast(std::vector<double>{1, 2}, {true, true})));
}

TEST_CASE("permutation quantile agrees with an independent enumeration") {
  // Four cells, one flagged: every permutation puts one of the four values in
  // the flagged slot, so the contrast takes four values with equal mass.
  const std::vector<double> v{4, 0, 0, 0};
  const std::vector<bool> f{true, false, false, false};
  const double q = permutation_quantile(v, f, 1000, 0.95, 11);
  CHECK(q == doctest::Approx(4.0));
  const double lo = permutation_quantile(v, f, 1000, 0.5, 11);
  CHECK(lo == doctest::Approx(-4.0 / 3.0));
  CHECK(permutation_quantile(v, f, 200, 0.95, 3) == permutation_quantile(v, f, 200, 0.95, 3));
}

TEST_CASE("occlusion scan is worker independent and masks change the input") {
  const auto ex = build_extractor(raw_spec(8));
  const Model model = Model::initialized(ex->output_dim(), {16}, 3, 9);
  RgbImage img(224, 224, {200, 40, 40});
  img.fill_rect({40, 40, 60, 60}, {20, 200, 20});
  OcclusionConfig c;
  const InfluenceMap one = occlusion_scan(img, *ex, model, 0, c, 1);
  const InfluenceMap four = occlusion_scan(img, *ex, model, 0, c, 4);
  REQUIRE(one.size() == 196);
  CHECK(one.baseline_ce == doctest::Approx(image_cross_entropy(img, *ex, model, 0)));
  bool nonzero = false;
  for (int i = 0; i < one.size(); ++i) {
    CHECK(one.records[static_cast<size_t>(i)].influence == four.records[static_cast<size_t>(i)].influence);
    CHECK(one.records[static_cast<size_t>(i)].influence ==
          one.records[static_cast<size_t>(i)].masked_ce - one.baseline_ce);
    nonzero = nonzero || one.records[static_cast<size_t>(i)].influence != 0.0;
  }
  CHECK(nonzero);
}

TEST_CASE("mask the same colour as a flat image gives zero influence everywhere") {
  const auto ex = build_extractor(raw_spec(4));
  const Model model = Model::initialized(ex->output_dim(), {8}, 3, 1);
  const RgbImage img(224, 224, {128, 128, 128});
  const InfluenceMap m = occlusion_scan(img, *ex, model, 2, OcclusionConfig{});
  for (const auto& r : m.records) CHECK(r.influence == 0.0);
  const RgbImage heat = render_heatmap(m, img);
  CHECK(heat.width == 224);
  CHECK(heat.height > 224);
}

TEST_CASE("jet colour endpoints") {
  CHECK(jet_color(0.0).b > jet_color(0.0).r);
  CHECK(jet_color(1.0).r > jet_color(1.0).b);
  CHECK(jet_color(0.5).g > jet_color(0.5).r);
}

TEST_CASE("influence CSV has one row per cell") {
  const InfluenceMap m = map_of({0.25, -1.0}, 2);
  const std::string csv = influence_csv(m);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(csv.rfind("region_index,x,y,w,h,C_j,E_j,sign\n", 0) == 0);
}
