#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "pairmrf/interactions.hpp"

namespace pairmrf {

/// Equality patterns imposed on the potentials theta_r(a, b).
enum class Family {
  OnePar,   ///< theta_r(a,b) = phi * [a != b]
  OneEach,  ///< theta_r(a,b) = phi_r * [a != b]
  AbsDif,   ///< theta_r(a,b) = phi_{r,|b-a|}, zero diagonal
  Dif,      ///< theta_r(a,b) = phi_{r,b-a}, zero diagonal
  Free,     ///< only theta_r(0,0) = 0
};

std::string_view to_string(Family family);
Family parse_family(std::string_view name);

/// Number of free parameters for a family over |R| positions with labels 0..C.
std::size_t free_dimension(Family family, std::size_t n_positions, int max_label);

/// Assigns each potential entry (k, a, b) the free parameter it equals, or -1
/// for entries fixed at zero.
///
/// Free-vector layout, positions outer:
///   onepar  - a single phi shared by all positions
///   oneeach - one phi per position
///   absdif  - d = 1..C
///   dif     - d = -C..-1, then 1..C
///   free    - (a, b) row-major, skipping (0, 0)
class ParameterMap {
 public:
  ParameterMap(Family family, std::size_t n_positions, int max_label);

  Family family() const { return family_; }
  std::size_t dimension() const { return dimension_; }
  std::size_t n_positions() const { return n_positions_; }
  int max_label() const { return max_label_; }
  int num_colors() const { return max_label_ + 1; }

  int operator()(std::size_t k, int a, int b) const {
    return index_[(k * num_colors() + static_cast<std::size_t>(a)) * num_colors() + static_cast<std::size_t>(b)];
  }
  /// Flat view in (k, a, b) order, matching PotentialArray::values().
  std::span<const int> entries() const { return index_; }

  /// Position owning free parameter m; nullopt for onepar, whose single
  /// parameter is shared by all positions.
  std::optional<std::size_t> owner(std::size_t m) const;

 private:
  Family family_;
  std::size_t n_positions_;
  int max_label_;
  std::size_t dimension_;
  std::vector<int> index_;
};

/// Potentials theta_r(a, b) for r in a structure, obeying a restriction family.
///
/// Stored as (C+1) x (C+1) x |R| with slice k belonging to structure[k];
/// theta_r(0,0) is zero in every slice.
class PotentialArray {
 public:
  const InteractionStructure& structure() const { return structure_; }
  Family family() const { return family_; }
  int max_label() const { return max_label_; }
  int num_colors() const { return max_label_ + 1; }
  std::size_t n_positions() const { return structure_.size(); }

  double operator()(std::size_t k, int a, int b) const {
    return values_[(k * num_colors() + static_cast<std::size_t>(a)) * num_colors() + static_cast<std::size_t>(b)];
  }
  /// Flat (k, a, b) order, b fastest.
  std::span<const double> values() const { return values_; }

  PotentialArray scaled(double factor) const;

  friend bool operator==(const PotentialArray&, const PotentialArray&) = default;

 private:
  friend PotentialArray expand_array(std::span<const double>, Family, const InteractionStructure&, int);

  InteractionStructure structure_;
  Family family_ = Family::OnePar;
  int max_label_ = 1;
  std::vector<double> values_;
};

/// Builds the array from its free parameters. Requires a non-empty structure,
/// C >= 1 and a vector of the family's free dimension.
PotentialArray expand_array(std::span<const double> theta_vec, Family family, const InteractionStructure& structure,
                            int max_label);

/// Free-parameter vector of an array; inverse of expand_array.
std::vector<double> summarize_array(const PotentialArray& theta);

/// Checks a raw (k, a, b) tensor against a family pattern within `tolerance`
/// (absolute) and returns the conforming array.
PotentialArray validate_family(std::span<const double> raw, Family family, const InteractionStructure& structure,
                               int max_label, double tolerance = 1e-12);

/// Model-spec document: the on-disk form of a model.
///
///   C 1
///   family oneeach
///   positions 3
///   1 0
///   0 1
///   4 4
///   theta 3
///   -0.993 -1.021 0.183
///
/// The positions block may be omitted; the structure must then come from
/// elsewhere. '#' starts a comment.
struct ModelSpec {
  int max_label = 1;
  Family family = Family::OnePar;
  std::optional<InteractionStructure> structure;
  std::vector<double> theta;

  /// Uses `override_structure` when the document has none; when both exist
  /// they must be identical.
  PotentialArray to_array(const std::optional<InteractionStructure>& override_structure = std::nullopt) const;
};

ModelSpec read_model_spec(std::istream& in);
void write_model_spec(const PotentialArray& theta, std::ostream& out);

}  // namespace pairmrf
