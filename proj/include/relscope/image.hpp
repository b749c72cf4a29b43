#ifndef RELSCOPE_IMAGE_HPP
#define RELSCOPE_IMAGE_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace relscope {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct Rect {
  int x = 0, y = 0, w = 0, h = 0;

  int right() const { return x + w; }
  int bottom() const { return y + h; }
  long area() const { return static_cast<long>(w) * h; }
  bool empty() const { return w <= 0 || h <= 0; }
  friend bool operator==(const Rect&, const Rect&) = default;
};

Rect intersect(const Rect& a, const Rect& b);
double intersection_over_union(const Rect& a, const Rect& b);

// Interleaved 8-bit RGB raster.
struct RgbImage {
  int width = 0, height = 0;
  std::vector<std::uint8_t> data;

  RgbImage() = default;
  RgbImage(int w, int h, Rgb fill = {});

  Rgb at(int x, int y) const {
    const auto* p = &data[3 * (static_cast<size_t>(y) * width + x)];
    return {p[0], p[1], p[2]};
  }
  void set(int x, int y, Rgb c) {
    auto* p = &data[3 * (static_cast<size_t>(y) * width + x)];
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  }
  void fill_rect(const Rect& r, Rgb c);
  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

// Interleaved 8-bit RGBA raster; alpha defines the silhouette.
struct RgbaImage {
  int width = 0, height = 0;
  std::vector<std::uint8_t> data;

  RgbaImage() = default;
  RgbaImage(int w, int h);

  std::uint8_t alpha(int x, int y) const {
    return data[4 * (static_cast<size_t>(y) * width + x) + 3];
  }
  const std::uint8_t* pixel(int x, int y) const {
    return &data[4 * (static_cast<size_t>(y) * width + x)];
  }
  std::uint8_t* pixel(int x, int y) { return &data[4 * (static_cast<size_t>(y) * width + x)]; }
  void set(int x, int y, Rgb c, std::uint8_t a = 255) {
    auto* p = pixel(x, y);
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
    p[3] = a;
  }
};

// Boolean raster, one byte per pixel (0 or 1).
struct Mask {
  int width = 0, height = 0;
  std::vector<std::uint8_t> bits;

  Mask() = default;
  Mask(int w, int h) : width(w), height(h), bits(static_cast<size_t>(w) * h, 0) {}

  bool at(int x, int y) const { return bits[static_cast<size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool v = true) { bits[static_cast<size_t>(y) * width + x] = v ? 1 : 0; }
  long count() const;
  // Tight bounding box of set pixels; empty Rect when no pixel is set.
  Rect bounds() const;
  friend bool operator==(const Mask&, const Mask&) = default;
};

// PNG codec (8-bit RGB, 8-bit RGBA, 1-bit grayscale masks). Encoding is
// byte-deterministic: fixed compression settings, no timestamps.
std::vector<std::uint8_t> encode_png(const RgbImage& img);
std::vector<std::uint8_t> encode_png(const Mask& mask);
RgbImage decode_png_rgb(std::span<const std::uint8_t> bytes);
RgbaImage decode_png_rgba(std::span<const std::uint8_t> bytes);
Mask decode_png_mask(std::span<const std::uint8_t> bytes);

RgbImage read_png_rgb(const std::filesystem::path& path);
RgbaImage read_png_rgba(const std::filesystem::path& path);
Mask read_png_mask(const std::filesystem::path& path);

// File helpers. Writes go to a sibling temp file and are renamed into place.
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

// Nearest-neighbour resize.
RgbImage resize_nearest(const RgbImage& img, int width, int height);

}  // namespace relscope

#endif  // RELSCOPE_IMAGE_HPP
