#include "relscope/image.hpp"

#include "relscope/common.hpp"

#include <png.h>

#include <algorithm>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <system_error>

namespace relscope {

Rect intersect(const Rect& a, const Rect& b) {
  const int x0 = std::max(a.x, b.x), y0 = std::max(a.y, b.y);
  const int x1 = std::min(a.right(), b.right()), y1 = std::min(a.bottom(), b.bottom());
  if (x1 <= x0 || y1 <= y0) return {};
  return {x0, y0, x1 - x0, y1 - y0};
}

double intersection_over_union(const Rect& a, const Rect& b) {
  const long inter = intersect(a, b).area();
  const long uni = a.area() + b.area() - inter;
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

RgbImage::RgbImage(int w, int h, Rgb fill)
    : width(w), height(h), data(3 * static_cast<size_t>(w) * h) {
  for (size_t i = 0; i < data.size(); i += 3) {
    data[i] = fill.r;
    data[i + 1] = fill.g;
    data[i + 2] = fill.b;
  }
}

void RgbImage::fill_rect(const Rect& r, Rgb c) {
  const Rect clipped = intersect(r, {0, 0, width, height});
  for (int y = clipped.y; y < clipped.bottom(); ++y)
    for (int x = clipped.x; x < clipped.right(); ++x) set(x, y, c);
}

RgbaImage::RgbaImage(int w, int h) : width(w), height(h), data(4 * static_cast<size_t>(w) * h, 0) {}

long Mask::count() const { return static_cast<long>(std::count(bits.begin(), bits.end(), 1)); }

Rect Mask::bounds() const {
  int x0 = width, y0 = height, x1 = -1, y1 = -1;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      if (at(x, y)) {
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
      }
  if (x1 < 0) return {};
  return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

namespace {

struct PngBuffer {
  std::vector<std::uint8_t>* out = nullptr;
  std::span<const std::uint8_t> in;
  size_t offset = 0;
  char message[256] = {};
};

void on_png_error(png_structp png, png_const_charp msg) {
  auto* buf = static_cast<PngBuffer*>(png_get_error_ptr(png));
  std::snprintf(buf->message, sizeof buf->message, "%s", msg);
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

void on_png_write(png_structp png, png_bytep data, png_size_t length) {
  auto* buf = static_cast<PngBuffer*>(png_get_io_ptr(png));
  buf->out->insert(buf->out->end(), data, data + length);
}

void on_png_flush(png_structp) {}

void on_png_read(png_structp png, png_bytep data, png_size_t length) {
  auto* buf = static_cast<PngBuffer*>(png_get_io_ptr(png));
  if (buf->offset + length > buf->in.size()) png_error(png, "truncated PNG stream");
  std::memcpy(data, buf->in.data() + buf->offset, length);
  buf->offset += length;
}

// Rows are pre-packed by the caller in the target bit depth.
bool write_png_rows(PngBuffer& buf, int width, int height, int bit_depth, int color_type,
                    png_bytepp rows) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &buf, on_png_error,
                                            on_png_warning);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, &buf, on_png_write, on_png_flush);
  png_set_compression_level(png, 6);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

struct DecodedPng {
  int width = 0, height = 0, channels = 0;
  std::vector<std::uint8_t> pixels;  // 8-bit, `channels` per pixel
};

// Decodes into 8-bit samples. want_channels: 1 gray, 3 RGB, 4 RGBA.
bool read_png_rows(PngBuffer& buf, int want_channels, DecodedPng& out) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &buf, on_png_error,
                                           on_png_warning);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  std::vector<png_bytep>* rows = nullptr;
  if (!info || setjmp(png_jmpbuf(png))) {
    delete rows;
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  if (buf.in.size() < 8 || png_sig_cmp(buf.in.data(), 0, 8) != 0) png_error(png, "not a PNG file");
  png_set_read_fn(png, &buf, on_png_read);
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  const bool is_gray = color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA;
  if (want_channels == 1) {
    if (!is_gray) png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    png_set_strip_alpha(png);
  } else {
    if (is_gray) png_set_gray_to_rgb(png);
    if (want_channels == 3) png_set_strip_alpha(png);
    if (want_channels == 4) png_set_add_alpha(png, 0xff, PNG_FILLER_AFTER);
  }
  png_read_update_info(png, info);
  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.channels = want_channels;
  if (png_get_rowbytes(png, info) != static_cast<size_t>(out.width) * want_channels)
    png_error(png, "unexpected PNG row layout");
  out.pixels.assign(static_cast<size_t>(out.width) * out.height * want_channels, 0);
  rows = new std::vector<png_bytep>(out.height);
  for (int y = 0; y < out.height; ++y)
    (*rows)[y] = out.pixels.data() + static_cast<size_t>(y) * out.width * want_channels;
  png_read_image(png, rows->data());
  png_read_end(png, nullptr);
  delete rows;
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

DecodedPng decode(std::span<const std::uint8_t> bytes, int channels) {
  PngBuffer buf;
  buf.in = bytes;
  DecodedPng out;
  if (!read_png_rows(buf, channels, out))
    throw FormatError(std::string("PNG decode failed: ") + buf.message);
  return out;
}

}  // namespace

std::vector<std::uint8_t> encode_png(const RgbImage& img) {
  std::vector<std::uint8_t> out;
  PngBuffer buf;
  buf.out = &out;
  std::vector<png_bytep> rows(img.height);
  for (int y = 0; y < img.height; ++y)
    rows[y] = const_cast<png_bytep>(img.data.data() + static_cast<size_t>(y) * img.width * 3);
  if (!write_png_rows(buf, img.width, img.height, 8, PNG_COLOR_TYPE_RGB, rows.data()))
    throw FormatError(std::string("PNG encode failed: ") + buf.message);
  return out;
}

std::vector<std::uint8_t> encode_png(const Mask& mask) {
  const size_t stride = (static_cast<size_t>(mask.width) + 7) / 8;
  std::vector<std::uint8_t> packed(stride * mask.height, 0);
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x)
      if (mask.at(x, y)) packed[y * stride + x / 8] |= static_cast<std::uint8_t>(0x80 >> (x % 8));
  std::vector<png_bytep> rows(mask.height);
  for (int y = 0; y < mask.height; ++y) rows[y] = packed.data() + y * stride;
  std::vector<std::uint8_t> out;
  PngBuffer buf;
  buf.out = &out;
  if (!write_png_rows(buf, mask.width, mask.height, 1, PNG_COLOR_TYPE_GRAY, rows.data()))
    throw FormatError(std::string("PNG encode failed: ") + buf.message);
  return out;
}

RgbImage decode_png_rgb(std::span<const std::uint8_t> bytes) {
  DecodedPng d = decode(bytes, 3);
  RgbImage img;
  img.width = d.width;
  img.height = d.height;
  img.data = std::move(d.pixels);
  return img;
}

RgbaImage decode_png_rgba(std::span<const std::uint8_t> bytes) {
  DecodedPng d = decode(bytes, 4);
  RgbaImage img;
  img.width = d.width;
  img.height = d.height;
  img.data = std::move(d.pixels);
  return img;
}

Mask decode_png_mask(std::span<const std::uint8_t> bytes) {
  DecodedPng d = decode(bytes, 1);
  Mask m(d.width, d.height);
  for (size_t i = 0; i < m.bits.size(); ++i) m.bits[i] = d.pixels[i] >= 128 ? 1 : 0;
  return m;
}

RgbImage read_png_rgb(const std::filesystem::path& path) { return decode_png_rgb(read_file(path)); }
RgbaImage read_png_rgba(const std::filesystem::path& path) { return decode_png_rgba(read_file(path)); }
Mask read_png_mask(const std::filesystem::path& path) { return decode_png_mask(read_file(path)); }

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return bytes;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename into " + path.string() + ": " + ec.message());
}

void write_file_atomic(const std::filesystem::path& path, std::string_view text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

RgbImage resize_nearest(const RgbImage& img, int width, int height) {
  if (img.width == width && img.height == height) return img;
  RgbImage out(width, height);
  for (int y = 0; y < height; ++y) {
    const int sy = static_cast<int>(static_cast<long>(y) * img.height / height);
    for (int x = 0; x < width; ++x) {
      const int sx = static_cast<int>(static_cast<long>(x) * img.width / width);
      out.set(x, y, img.at(sx, sy));
    }
  }
  return out;
}

}  // namespace relscope
