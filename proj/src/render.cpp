#include "pairmrf/render.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <string>

namespace pairmrf {

namespace {

constexpr std::array<std::array<double, 3>, 9> kViridis{{
    {68, 1, 84},
    {71, 44, 122},
    {59, 81, 139},
    {44, 113, 142},
    {33, 144, 141},
    {39, 173, 129},
    {92, 200, 99},
    {170, 220, 50},
    {253, 231, 37},
}};

constexpr std::array<Rgba, 10> kCategorical{{
    {31, 119, 180, 255},
    {255, 127, 14, 255},
    {44, 160, 44, 255},
    {214, 39, 40, 255},
    {148, 103, 189, 255},
    {140, 86, 75, 255},
    {227, 119, 194, 255},
    {127, 127, 127, 255},
    {188, 189, 34, 255},
    {23, 190, 207, 255},
}};

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

Rgba ramp(Palette palette, double t) {
  t = std::clamp(t, 0.0, 1.0);
  if (palette == Palette::Gray) {
    const auto g = to_byte(255.0 * t);
    return {g, g, g, 255};
  }
  const double pos = t * static_cast<double>(kViridis.size() - 1);
  const auto lo = std::min(static_cast<std::size_t>(pos), kViridis.size() - 2);
  const double frac = pos - static_cast<double>(lo);
  Rgba out{0, 0, 0, 255};
  for (int ch = 0; ch < 3; ++ch) {
    out[ch] = to_byte(kViridis[lo][ch] * (1.0 - frac) + kViridis[lo + 1][ch] * frac);
  }
  return out;
}

}  // namespace

Palette parse_palette(std::string_view name) {
  if (name == "gray" || name == "grey") return Palette::Gray;
  if (name == "viridis") return Palette::Viridis;
  if (name == "categorical") return Palette::Categorical;
  throw std::invalid_argument("unknown palette '" + std::string(name) + "'");
}

Image render_field(const DiscreteField& field, Palette palette) {
  Image img{field.cols(), field.rows(), std::vector<Rgba>(field.dims().size(), kTransparent)};
  const int c_max = field.max_label();
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    const int v = field[i];
    if (v == DiscreteField::kMasked) continue;
    if (palette == Palette::Categorical) {
      img.pixels[i] = kCategorical[static_cast<std::size_t>(v) % kCategorical.size()];
    } else {
      img.pixels[i] = ramp(palette, c_max > 0 ? static_cast<double>(v) / c_max : 0.0);
    }
  }
  return img;
}

Image render_field(const RealField& field, Palette palette) {
  if (palette == Palette::Categorical) throw std::invalid_argument("categorical palette needs a discrete field");
  double lo = INFINITY;
  double hi = -INFINITY;
  for (double v : field.values()) {
    if (std::isnan(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  Image img{field.cols(), field.rows(), std::vector<Rgba>(field.dims().size(), kTransparent)};
  const double span = hi - lo;
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    const double v = field[i];
    if (std::isnan(v)) continue;
    img.pixels[i] = ramp(palette, span > 0 ? (v - lo) / span : 0.5);
  }
  return img;
}

Image hconcat(std::span<const Image> images, int gap) {
  if (images.empty()) throw std::invalid_argument("nothing to concatenate");
  int width = 0;
  int height = 0;
  for (const auto& im : images) {
    width += im.width;
    height = std::max(height, im.height);
  }
  width += gap * static_cast<int>(images.size() - 1);
  Image out{width, height, std::vector<Rgba>(static_cast<std::size_t>(width) * height, kTransparent)};
  int x0 = 0;
  for (const auto& im : images) {
    for (int r = 0; r < im.height; ++r) {
      for (int c = 0; c < im.width; ++c) {
        out.pixels[static_cast<std::size_t>(r) * width + x0 + c] = im.at(r, c);
      }
    }
    x0 += im.width + gap;
  }
  return out;
}

void write_png(const Image& image, const std::filesystem::path& path) {
  if (image.width <= 0 || image.height <= 0) throw std::invalid_argument("empty image");
  std::unique_ptr<std::FILE, decltype(&std::fclose)> fp(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!fp) throw std::runtime_error("cannot write " + path.string());

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) throw std::runtime_error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng error while writing " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height), 8,
               PNG_COLOR_TYPE_RGBA, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int r = 0; r < image.height; ++r) {
    auto* row = const_cast<png_bytep>(reinterpret_cast<const png_byte*>(&image.pixels[static_cast<std::size_t>(r) * image.width]));
    png_write_row(png, row);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace pairmrf
