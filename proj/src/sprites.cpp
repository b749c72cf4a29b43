#include "relscope/synth.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>

namespace relscope {
namespace {

// Draws in normalized sprite coordinates; (0,0) top-left, (1,1) bottom-right.
// A pixel is covered when its center falls inside the primitive.
class Painter {
 public:
  Painter(int w, int h, bool mirror) : img_(w, h), mirror_(mirror) {}

  void ellipse(double cx, double cy, double rx, double ry, Rgb c) {
    for_each_pixel([&](double u, double v) {
      const double dx = (u - cx) / rx, dy = (v - cy) / ry;
      return dx * dx + dy * dy <= 1.0;
    }, c);
  }

  void rect(double x0, double y0, double x1, double y1, Rgb c) {
    for_each_pixel([&](double u, double v) { return u >= x0 && u <= x1 && v >= y0 && v <= y1; }, c);
  }

  void ring(double cx, double cy, double rx, double ry, double thickness, Rgb c) {
    for_each_pixel([&](double u, double v) {
      const double dx = (u - cx) / rx, dy = (v - cy) / ry;
      const double ix = (u - cx) / (rx - thickness), iy = (v - cy) / (ry - thickness);
      return dx * dx + dy * dy <= 1.0 && ix * ix + iy * iy > 1.0;
    }, c);
  }

  void polygon(std::vector<std::pair<double, double>> pts, Rgb c) {
    for_each_pixel([&](double u, double v) {
      bool inside = false;
      for (size_t i = 0, j = pts.size() - 1; i < pts.size(); j = i++) {
        const auto [xi, yi] = pts[i];
        const auto [xj, yj] = pts[j];
        if ((yi > v) != (yj > v) && u < (xj - xi) * (v - yi) / (yj - yi) + xi) inside = !inside;
      }
      return inside;
    }, c);
  }

  RgbaImage take() { return std::move(img_); }

 private:
  template <typename Pred>
  void for_each_pixel(Pred&& inside, Rgb c) {
    for (int y = 0; y < img_.height; ++y)
      for (int x = 0; x < img_.width; ++x) {
        double u = (x + 0.5) / img_.width;
        const double v = (y + 0.5) / img_.height;
        if (mirror_) u = 1.0 - u;
        if (inside(u, v)) img_.set(x, y, c);
      }
  }

  RgbaImage img_;
  bool mirror_;
};

Rgb shade(Rgb c, double f) {
  auto ch = [f](int v) { return static_cast<std::uint8_t>(std::clamp(static_cast<int>(std::lround(v * f)), 0, 255)); };
  return {ch(c.r), ch(c.g), ch(c.b)};
}

Rgb jitter(Rgb c, Rng& rng) {
  auto ch = [&](int v) { return static_cast<std::uint8_t>(std::clamp(v + uniform_int(rng, -25, 25), 0, 255)); };
  return {ch(c.r), ch(c.g), ch(c.b)};
}

Rgb pick(std::initializer_list<Rgb> colors, Rng& rng) {
  const auto* p = colors.begin() + uniform_int(rng, 0, static_cast<int>(colors.size()) - 1);
  return jitter(*p, rng);
}

struct Recipe {
  int variants;
  double aspect;  // width / height
  std::function<void(Painter&, Rng&)> draw;
};

const Rgb kBlack{20, 20, 20};

void four_legs(Painter& p, double y0, double y1, double w, Rgb c) {
  for (double x : {0.22, 0.34, 0.58, 0.70}) p.rect(x, y0, x + w, y1, c);
}

const std::map<std::string, Recipe>& recipes() {
  static const std::map<std::string, Recipe> table = {
      {"dog", {7, 1.3, [](Painter& p, Rng& r) {
         const Rgb c = pick({{120, 72, 30}, {60, 40, 25}, {200, 160, 90}, {30, 30, 30}}, r);
         const double body = uniform_real(r, 0.15, 0.2);
         p.ellipse(0.48, 0.5, 0.33, body, c);
         four_legs(p, 0.5, 0.97, 0.07, c);
         p.ellipse(0.82, 0.3, 0.14, 0.17, c);
         p.polygon({{0.76, 0.18}, {0.86, 0.02}, {0.9, 0.2}}, shade(c, 0.7));
         p.polygon({{0.15, 0.45}, {0.02, 0.22}, {0.08, 0.2}, {0.2, 0.4}}, c);
       }}},
      {"tiger", {5, 1.5, [](Painter& p, Rng& r) {
         const Rgb c = pick({{230, 120, 20}, {210, 100, 10}, {240, 150, 40}}, r);
         p.ellipse(0.47, 0.5, 0.36, 0.18, c);
         four_legs(p, 0.5, 0.97, 0.07, c);
         p.ellipse(0.84, 0.36, 0.13, 0.17, c);
         for (double x = 0.2; x < 0.75; x += uniform_real(r, 0.08, 0.12)) p.rect(x, 0.33, x + 0.03, 0.6, kBlack);
         p.polygon({{0.12, 0.45}, {0.0, 0.6}, {0.03, 0.65}, {0.16, 0.52}}, c);
       }}},
      {"table", {5, 1.4, [](Painter& p, Rng& r) {
         const Rgb c = pick({{140, 80, 40}, {100, 60, 30}, {180, 120, 70}, {60, 60, 70}}, r);
         const double top = uniform_real(r, 0.08, 0.3);
         p.rect(0.02, top, 0.98, top + 0.14, c);
         p.rect(0.08, top + 0.14, 0.17, 0.98, shade(c, 0.8));
         p.rect(0.83, top + 0.14, 0.92, 0.98, shade(c, 0.8));
       }}},
      {"lamp", {5, 0.7, [](Painter& p, Rng& r) {
         const Rgb shade_c = pick({{240, 200, 40}, {200, 40, 40}, {40, 90, 200}, {230, 230, 210}}, r);
         const Rgb metal = pick({{70, 70, 80}, {150, 120, 40}}, r);
         p.polygon({{0.25, 0.02}, {0.75, 0.02}, {0.98, 0.38}, {0.02, 0.38}}, shade_c);
         p.rect(0.44, 0.38, 0.56, 0.88, metal);
         p.ellipse(0.5, 0.92, 0.38, 0.07, metal);
       }}},
      {"tv", {5, 1.35, [](Painter& p, Rng& r) {
         const Rgb frame = pick({{25, 25, 30}, {60, 60, 65}, {110, 100, 90}}, r);
         const Rgb screen = pick({{40, 80, 160}, {20, 140, 160}, {90, 40, 140}}, r);
         p.rect(0.02, 0.02, 0.98, 0.78, frame);
         p.rect(0.1, 0.1, 0.9, 0.7, screen);
         p.rect(0.42, 0.78, 0.58, 0.9, frame);
         p.rect(0.25, 0.9, 0.75, 0.98, frame);
       }}},
      {"sofa", {5, 1.6, [](Painter& p, Rng& r) {
         const Rgb c = pick({{150, 30, 40}, {40, 100, 60}, {60, 60, 140}, {120, 90, 60}}, r);
         p.rect(0.1, 0.1, 0.9, 0.55, shade(c, 0.85));
         p.rect(0.04, 0.45, 0.96, 0.82, c);
         p.rect(0.0, 0.3, 0.12, 0.82, shade(c, 0.75));
         p.rect(0.88, 0.3, 1.0, 0.82, shade(c, 0.75));
         p.rect(0.08, 0.82, 0.14, 0.98, kBlack);
         p.rect(0.86, 0.82, 0.92, 0.98, kBlack);
       }}},
      {"ball", {5, 1.0, [](Painter& p, Rng& r) {
         const Rgb c = pick({{220, 40, 40}, {40, 160, 60}, {240, 200, 30}, {30, 90, 200}}, r);
         p.ellipse(0.5, 0.5, 0.48, 0.48, c);
         p.rect(0.02, 0.44, 0.98, 0.56, shade(c, 0.55));
       }}},
      {"hat", {4, 1.3, [](Painter& p, Rng& r) {
         const Rgb c = pick({{30, 30, 30}, {120, 70, 40}, {150, 20, 30}, {40, 40, 110}}, r);
         p.ellipse(0.5, 0.82, 0.49, 0.14, c);
         p.polygon({{0.26, 0.82}, {0.3, 0.08}, {0.7, 0.08}, {0.74, 0.82}}, c);
         p.rect(0.27, 0.6, 0.73, 0.7, pick({{200, 30, 30}, {230, 230, 230}}, r));
       }}},
      {"vase", {5, 0.75, [](Painter& p, Rng& r) {
         const Rgb c = pick({{30, 80, 160}, {170, 60, 30}, {40, 130, 120}, {130, 40, 120}}, r);
         p.ellipse(0.5, 0.64, 0.46, 0.34, c);
         p.rect(0.34, 0.1, 0.66, 0.4, c);
         p.rect(0.24, 0.02, 0.76, 0.12, shade(c, 0.7));
       }}},
      {"vacuum_cleaner", {4, 0.9, [](Painter& p, Rng& r) {
         const Rgb c = pick({{200, 30, 30}, {230, 160, 20}, {60, 60, 70}}, r);
         p.ellipse(0.3, 0.78, 0.28, 0.2, c);
         p.ellipse(0.18, 0.96, 0.08, 0.04, kBlack);
         p.ellipse(0.44, 0.96, 0.08, 0.04, kBlack);
         p.polygon({{0.45, 0.7}, {0.85, 0.05}, {0.95, 0.1}, {0.55, 0.75}}, shade(c, 0.6));
         p.rect(0.75, 0.02, 0.98, 0.1, kBlack);
       }}},
      {"deer", {4, 1.1, [](Painter& p, Rng& r) {
         const Rgb c = pick({{160, 100, 50}, {130, 80, 40}}, r);
         p.ellipse(0.45, 0.55, 0.3, 0.14, c);
         four_legs(p, 0.55, 0.99, 0.05, c);
         p.polygon({{0.68, 0.5}, {0.74, 0.25}, {0.82, 0.27}, {0.78, 0.52}}, c);
         p.ellipse(0.82, 0.24, 0.1, 0.08, c);
         p.rect(0.76, 0.02, 0.79, 0.18, shade(c, 0.6));
         p.rect(0.86, 0.02, 0.89, 0.18, shade(c, 0.6));
       }}},
      {"lion", {4, 1.35, [](Painter& p, Rng& r) {
         const Rgb c = pick({{210, 160, 70}, {190, 140, 60}}, r);
         const Rgb mane = pick({{120, 60, 20}, {90, 50, 20}}, r);
         p.ellipse(0.45, 0.55, 0.33, 0.17, c);
         four_legs(p, 0.55, 0.98, 0.07, c);
         p.ellipse(0.8, 0.35, 0.19, 0.3, mane);
         p.ellipse(0.82, 0.36, 0.11, 0.16, c);
       }}},
      {"drawer", {4, 0.9, [](Painter& p, Rng& r) {
         const Rgb c = pick({{130, 80, 40}, {200, 190, 170}, {70, 60, 60}}, r);
         p.rect(0.02, 0.02, 0.98, 0.94, shade(c, 0.75));
         for (double y : {0.06, 0.36, 0.66}) {
           p.rect(0.08, y, 0.92, y + 0.24, c);
           p.rect(0.42, y + 0.1, 0.58, y + 0.14, kBlack);
         }
         p.rect(0.04, 0.94, 0.12, 0.99, kBlack);
         p.rect(0.88, 0.94, 0.96, 0.99, kBlack);
       }}},
      {"bag", {4, 0.95, [](Painter& p, Rng& r) {
         const Rgb c = pick({{100, 50, 30}, {170, 30, 60}, {30, 30, 30}, {40, 90, 60}}, r);
         p.polygon({{0.12, 0.35}, {0.88, 0.35}, {0.98, 0.98}, {0.02, 0.98}}, c);
         p.ring(0.5, 0.36, 0.3, 0.32, 0.07, shade(c, 0.7));
       }}},
      {"car", {4, 1.8, [](Painter& p, Rng& r) {
         const Rgb c = pick({{200, 20, 30}, {30, 60, 170}, {30, 140, 60}, {230, 200, 20}}, r);
         p.rect(0.02, 0.4, 0.98, 0.78, c);
         p.polygon({{0.22, 0.4}, {0.32, 0.05}, {0.7, 0.05}, {0.8, 0.4}}, shade(c, 0.8));
         p.rect(0.36, 0.12, 0.66, 0.36, {170, 210, 230});
         p.ellipse(0.24, 0.82, 0.12, 0.17, kBlack);
         p.ellipse(0.76, 0.82, 0.12, 0.17, kBlack);
       }}},
  };
  return table;
}

const Recipe& recipe_for(const std::string& object) {
  const auto& t = recipes();
  auto it = t.find(object);
  if (it == t.end()) throw AssetError("no procedural sprite for object '" + object + "'");
  return it->second;
}

}  // namespace

const std::vector<std::string>& builtin_train_objects() {
  static const std::vector<std::string> objs = {"dog", "tiger", "table", "lamp", "tv",
                                                "sofa", "ball", "hat", "vase", "vacuum_cleaner"};
  return objs;
}

const std::vector<std::string>& builtin_test_objects() {
  static const std::vector<std::string> objs = {"deer", "lion", "drawer", "bag", "car"};
  return objs;
}

int procedural_variant_count(const std::string& object) { return recipe_for(object).variants; }

RgbaImage draw_procedural_sprite(const std::string& object, int variant) {
  const Recipe& recipe = recipe_for(object);
  Rng rng(derive_seed(fnv1a(object), "sprite", static_cast<std::uint64_t>(variant)));
  const int height = uniform_int(rng, 44, 60);
  const int width = std::clamp(static_cast<int>(std::lround(height * recipe.aspect * uniform_real(rng, 0.9, 1.1))), 24, 76);
  Painter painter(width, height, variant % 2 == 1);
  recipe.draw(painter, rng);
  return painter.take();
}

void validate_sprite(const SpriteAsset& sprite, int canvas_width, int canvas_height) {
  const auto& px = sprite.pixels;
  if (px.width <= 0 || px.height <= 0 || px.data.size() != 4 * static_cast<size_t>(px.width) * px.height)
    throw AssetError("malformed sprite raster: " + sprite.id);
  if (px.width >= canvas_width || px.height >= canvas_height)
    throw AssetError("sprite " + sprite.id + " does not fit the canvas");
  for (int y = 0; y < px.height; ++y)
    for (int x = 0; x < px.width; ++x)
      if (px.alpha(x, y) != 0) return;
  throw AssetError("sprite " + sprite.id + " has no opaque pixel");
}

SpriteLibrary SpriteLibrary::procedural() {
  SpriteLibrary lib;
  for (const auto& [object, recipe] : recipes())
    for (int v = 0; v < recipe.variants; ++v)
      lib.add({object + "/" + std::to_string(v), object, v, draw_procedural_sprite(object, v)});
  return lib;
}

SpriteLibrary SpriteLibrary::from_directory(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw AssetError("sprite directory not found: " + dir.string());
  SpriteLibrary lib = procedural();
  std::vector<fs::path> object_dirs;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_directory()) object_dirs.push_back(e.path());
  std::sort(object_dirs.begin(), object_dirs.end());
  for (const auto& od : object_dirs) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(od))
      if (e.path().extension() == ".png") files.push_back(e.path());
    if (files.empty()) continue;
    std::sort(files.begin(), files.end());
    const std::string object = od.filename().string();
    lib.pool_.erase(object);
    int v = 0;
    for (const auto& f : files) {
      RgbaImage img = read_png_rgba(f);
      for (size_t i = 3; i < img.data.size(); i += 4) img.data[i] = img.data[i] >= 128 ? 255 : 0;
      lib.add({object + "/" + std::to_string(v), object, v, std::move(img)});
      ++v;
    }
  }
  return lib;
}

void SpriteLibrary::add(SpriteAsset sprite) {
  auto& pool = pool_[sprite.object];
  pool.push_back(std::make_shared<const SpriteAsset>(std::move(sprite)));
}

const std::vector<std::shared_ptr<const SpriteAsset>>& SpriteLibrary::variants(const std::string& object) const {
  auto it = pool_.find(object);
  if (it == pool_.end() || it->second.empty()) throw AssetError("no sprites for object '" + object + "'");
  return it->second;
}

std::vector<std::string> SpriteLibrary::objects() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : pool_) out.push_back(k);
  return out;
}

}  // namespace relscope
