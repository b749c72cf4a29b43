#include "relscope/influence.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

namespace relscope {

namespace {

// 3x5 glyphs, one row per byte, bit 2 = leftmost column.
const std::array<std::uint8_t, 5>* glyph(char ch) {
  static const std::array<std::uint8_t, 5> digits[10] = {
      {7, 5, 5, 5, 7}, {2, 6, 2, 2, 7}, {7, 1, 7, 4, 7}, {7, 1, 7, 1, 7}, {5, 5, 7, 1, 1},
      {7, 4, 7, 1, 7}, {7, 4, 7, 5, 7}, {7, 1, 1, 1, 1}, {7, 5, 7, 5, 7}, {7, 5, 7, 1, 7}};
  static const std::array<std::uint8_t, 5> dot{0, 0, 0, 0, 2}, minus{0, 0, 7, 0, 0}, plus{0, 2, 7, 2, 0},
      e{7, 4, 7, 4, 7}, n{0, 6, 5, 5, 5}, a{7, 1, 7, 5, 7}, i{2, 0, 2, 2, 2}, f{3, 4, 6, 4, 4};
  if (ch >= '0' && ch <= '9') return &digits[ch - '0'];
  switch (ch) {
    case '.': return &dot;
    case '-': return &minus;
    case '+': return &plus;
    case 'e': return &e;
    case 'n': return &n;
    case 'a': return &a;
    case 'i': return &i;
    case 'f': return &f;
    default: return nullptr;
  }
}

constexpr int kGlyphScale = 2;
constexpr int kGlyphAdvance = 4 * kGlyphScale;

void draw_text(RgbImage& img, int x, int y, const std::string& text, Rgb color) {
  for (char ch : text) {
    if (const auto* g = glyph(ch)) {
      for (int row = 0; row < 5; ++row)
        for (int col = 0; col < 3; ++col)
          if ((*g)[row] & (4 >> col))
            img.fill_rect({x + col * kGlyphScale, y + row * kGlyphScale, kGlyphScale, kGlyphScale}, color);
    }
    x += kGlyphAdvance;
  }
}

std::uint8_t blend(std::uint8_t over, std::uint8_t under, double alpha) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(alpha * over + (1.0 - alpha) * under), 0L, 255L));
}

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace

Rgb jet_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  auto ch = [](double v) { return static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(v, 0.0, 1.0))); };
  const double r = 1.5 - std::abs(4.0 * t - 3.0);
  const double g = 1.5 - std::abs(4.0 * t - 2.0);
  const double b = 1.5 - std::abs(4.0 * t - 1.0);
  return {ch(r), ch(g), ch(b)};
}

RgbImage render_heatmap(const InfluenceMap& map, const RgbImage& image, const HeatmapOptions& options) {
  if (map.image_width != image.width || map.image_height != image.height)
    throw DimensionError("influence map does not match the image dimensions");
  if (map.records.empty()) throw DataError("empty influence map");
  const double lo = map.min_influence(), hi = map.max_influence();
  const bool flat = !(hi > lo);
  auto scale = [&](double v) { return flat ? 0.5 : (v - lo) / (hi - lo); };

  RgbImage out(image.width, image.height + options.legend_height, {255, 255, 255});
  std::copy(image.data.begin(), image.data.end(), out.data.begin());

  const int covered_w = map.records.back().region.right();
  const int covered_h = map.records.back().region.bottom();
  const double cell_w = map.cols > 1 ? map.records[1].region.x - map.records[0].region.x : covered_w;
  const double cell_h = map.rows > 1 ? map.at(1, 0).region.y - map.at(0, 0).region.y : covered_h;
  const int mw = map.records.front().region.w, mh = map.records.front().region.h;

  for (int y = 0; y < covered_h; ++y)
    for (int x = 0; x < covered_w; ++x) {
      double t;
      if (!options.smooth) {
        const int c = std::min(map.cols - 1, static_cast<int>(x / cell_w));
        const int r = std::min(map.rows - 1, static_cast<int>(y / cell_h));
        t = scale(map.at(r, c).influence);
      } else {
        // Bilinear over cell centers.
        const double gx = std::clamp((x + 0.5 - mw / 2.0) / cell_w, 0.0, map.cols - 1.0);
        const double gy = std::clamp((y + 0.5 - mh / 2.0) / cell_h, 0.0, map.rows - 1.0);
        const int c0 = static_cast<int>(gx), r0 = static_cast<int>(gy);
        const int c1 = std::min(c0 + 1, map.cols - 1), r1 = std::min(r0 + 1, map.rows - 1);
        const double fx = gx - c0, fy = gy - r0;
        const double v = (1 - fy) * ((1 - fx) * map.at(r0, c0).influence + fx * map.at(r0, c1).influence) +
                         fy * ((1 - fx) * map.at(r1, c0).influence + fx * map.at(r1, c1).influence);
        t = scale(v);
      }
      const Rgb heat = jet_color(t);
      const Rgb src = image.at(x, y);
      out.set(x, y, {blend(heat.r, src.r, options.alpha), blend(heat.g, src.g, options.alpha),
                     blend(heat.b, src.b, options.alpha)});
    }

  if (options.legend_height >= 8) {
    const int bar_top = image.height + 2;
    const int bar_h = std::max(2, options.legend_height / 3);
    for (int x = 0; x < image.width; ++x) {
      const Rgb c = flat ? jet_color(0.5) : jet_color(image.width > 1 ? static_cast<double>(x) / (image.width - 1) : 0.5);
      out.fill_rect({x, bar_top, 1, bar_h}, c);
    }
    const int text_y = bar_top + bar_h + 2;
    if (text_y + 5 * kGlyphScale <= out.height) {
      const std::string lo_text = format_value(lo), hi_text = format_value(hi);
      draw_text(out, 1, text_y, lo_text, {0, 0, 0});
      draw_text(out, image.width - static_cast<int>(hi_text.size()) * kGlyphAdvance, text_y, hi_text, {0, 0, 0});
    }
  }
  return out;
}

}  // namespace relscope
