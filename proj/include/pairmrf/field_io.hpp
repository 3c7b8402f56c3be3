#pragma once

#include <filesystem>
#include <iosfwd>

#include "pairmrf/field.hpp"

namespace pairmrf {

// Text grid format: one lattice row per line, whitespace-separated tokens,
// each a non-negative integer label or "NA" for a pixel outside the lattice.
// Blank lines and lines starting with '#' are ignored, except the directive
// "#C=<n>" which fixes the maximum label instead of inferring it.
DiscreteField read_discrete_field(std::istream& in);
void write_discrete_field(const DiscreteField& field, std::ostream& out);

// Netpbm graymap, plain (P2) or raw (P5). Gray level = label.
DiscreteField read_pgm(std::istream& in);
void write_pgm(const DiscreteField& field, std::ostream& out);

// Comma-separated reals, one row per line, "NA" outside the lattice.
RealField read_real_csv(std::istream& in);
void write_real_csv(const RealField& field, std::ostream& out);

// Text grid of 0/1 flags.
PixelRegion read_region(std::istream& in);
void write_region(const PixelRegion& region, std::ostream& out);

// Path helpers. Discrete fields ending in .pgm use the graymap codec,
// everything else the text grid.
DiscreteField load_discrete_field(const std::filesystem::path& path);
void save_discrete_field(const DiscreteField& field, const std::filesystem::path& path);
RealField load_real_field(const std::filesystem::path& path);
void save_real_field(const RealField& field, const std::filesystem::path& path);
PixelRegion load_region(const std::filesystem::path& path);

}  // namespace pairmrf
