#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "pairmrf/field.hpp"

namespace pairmrf {

using Rgba = std::array<std::uint8_t, 4>;

/// 8-bit RGBA raster, row-major, one image pixel per lattice pixel.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<Rgba> pixels;

  const Rgba& at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * width + col]; }
};

enum class Palette { Gray, Viridis, Categorical };

Palette parse_palette(std::string_view name);

/// Pixels outside the lattice are fully transparent.
inline constexpr Rgba kTransparent{0, 0, 0, 0};

/// Label k maps to palette position k / C (Gray, Viridis) or to the k-th
/// categorical color.
Image render_field(const DiscreteField& field, Palette palette = Palette::Gray);

/// Linear ramp over [min, max] of the lattice values; a constant field maps
/// to the ramp midpoint. Categorical is not a valid ramp.
Image render_field(const RealField& field, Palette palette = Palette::Gray);

/// Places images left to right, separated by `gap` transparent columns.
Image hconcat(std::span<const Image> images, int gap = 4);

void write_png(const Image& image, const std::filesystem::path& path);

}  // namespace pairmrf
