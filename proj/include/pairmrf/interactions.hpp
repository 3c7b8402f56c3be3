#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pairmrf {

/// Relative lattice position r = (row offset, column offset). The neighbor of
/// pixel (i1, i2) at r is (i1 + r.row, i2 + r.col).
struct Offset {
  int row = 0;
  int col = 0;

  Offset operator-() const { return {-row, -col}; }
  bool is_origin() const { return row == 0 && col == 0; }
  friend bool operator==(const Offset&, const Offset&) = default;
};

/// "(r1,r2)"
std::string to_string(Offset r);

enum class NormType { L1, L2, Linf };

/// Accepts "1"/"L1", "2"/"L2", "m"/"max"/"inf"/"Linf" (case-insensitive).
NormType parse_norm_type(std::string_view name);

/// Ordered, reflection-free set of relative positions.
///
/// Invariants: no position is the origin, no duplicates, and no position is
/// the reflection of another. Order is meaningful: slice k of a potential
/// array belongs to positions()[k].
class InteractionStructure {
 public:
  InteractionStructure() = default;
  explicit InteractionStructure(std::vector<Offset> positions);

  std::span<const Offset> positions() const { return positions_; }
  std::size_t size() const { return positions_.size(); }
  bool empty() const { return positions_.empty(); }
  const Offset& operator[](std::size_t k) const { return positions_[k]; }

  /// Index of r or of its reflection.
  std::optional<std::size_t> find(Offset r) const;
  bool contains(Offset r) const { return find(r).has_value(); }

  /// Set equality with r ~ -r, ignoring order and representative.
  bool equivalent(const InteractionStructure& other) const;

  friend bool operator==(const InteractionStructure&, const InteractionStructure&) = default;

 private:
  std::vector<Offset> positions_;
};

/// All canonical positions with ||r|| <= max_norm, followed by `extra`.
/// Canonical representatives have row > 0, or row == 0 and col > 0, and are
/// ordered by (norm, col, row). An extra position replaces a norm-derived one
/// it duplicates or reflects.
InteractionStructure build_structure(double max_norm, NormType norm, std::span<const Offset> extra = {});

/// Positions of `a`, then those of `b` not already present up to reflection.
InteractionStructure unite(const InteractionStructure& a, const InteractionStructure& b);
InteractionStructure unite(const InteractionStructure& a, Offset r);

/// Positions of `a` whose reflection class does not appear in `b`.
InteractionStructure difference(const InteractionStructure& a, const InteractionStructure& b);
InteractionStructure difference(const InteractionStructure& a, Offset r);

/// Positions at the given zero-based indices, in the given order.
InteractionStructure subset(const InteractionStructure& a, std::span<const std::size_t> indices);

inline InteractionStructure operator+(const InteractionStructure& a, const InteractionStructure& b) {
  return unite(a, b);
}
inline InteractionStructure operator+(const InteractionStructure& a, Offset r) { return unite(a, r); }
inline InteractionStructure operator-(const InteractionStructure& a, const InteractionStructure& b) {
  return difference(a, b);
}
inline InteractionStructure operator-(const InteractionStructure& a, Offset r) { return difference(a, r); }

// One "r1 r2" pair per line; '#' starts a comment line.
InteractionStructure read_structure(std::istream& in);
void write_structure(const InteractionStructure& structure, std::ostream& out);

}  // namespace pairmrf
