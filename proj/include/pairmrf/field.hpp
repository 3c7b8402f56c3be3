#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace pairmrf {

/// Lattice dimensions. Pixel (row, col) is stored at row * cols + col.
struct Dims {
  int rows = 0;
  int cols = 0;

  std::size_t size() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(col);
  }
  bool contains(int row, int col) const { return row >= 0 && row < rows && col >= 0 && col < cols; }
  friend bool operator==(const Dims&, const Dims&) = default;
};

/// Zero-based pixel coordinate: row top-to-bottom, column left-to-right.
struct Pixel {
  int row = 0;
  int col = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// Boolean mask over a lattice's bounding rectangle.
class PixelRegion {
 public:
  PixelRegion() = default;
  PixelRegion(Dims dims, bool fill);
  PixelRegion(Dims dims, std::vector<std::uint8_t> flags);

  Dims dims() const { return dims_; }
  bool at(int row, int col) const { return flags_[dims_.index(row, col)] != 0; }
  bool operator[](std::size_t idx) const { return flags_[idx] != 0; }
  std::span<const std::uint8_t> flags() const { return flags_; }
  std::size_t count() const;

  friend bool operator==(const PixelRegion&, const PixelRegion&) = default;

 private:
  Dims dims_;
  std::vector<std::uint8_t> flags_;
};

/// Finite-valued field on a (possibly non-rectangular) lattice.
///
/// Labels live in {0..C}. Pixels outside the lattice carry kMasked. The
/// maximum label C may exceed the largest observed label so that colors
/// absent from a particular sample keep their place in the model.
class DiscreteField {
 public:
  static constexpr int kMasked = -1;

  DiscreteField() = default;
  /// `max_label < 0` infers C from the data.
  DiscreteField(Dims dims, std::vector<int> labels, int max_label = -1);

  Dims dims() const { return dims_; }
  int rows() const { return dims_.rows; }
  int cols() const { return dims_.cols; }
  int max_label() const { return max_label_; }
  int num_colors() const { return max_label_ + 1; }

  int at(int row, int col) const { return labels_[dims_.index(row, col)]; }
  int operator[](std::size_t idx) const { return labels_[idx]; }
  bool in_lattice(int row, int col) const { return at(row, col) != kMasked; }
  std::span<const int> labels() const { return labels_; }

  /// Number of pixels in the lattice (unmasked).
  std::size_t lattice_size() const { return lattice_size_; }
  PixelRegion mask() const;
  /// Count of each label 0..C over the lattice.
  std::vector<std::int64_t> color_counts() const;
  /// Number of distinct labels actually present.
  int distinct_labels() const;

  /// Same mask and C, new labels.
  DiscreteField with_labels(std::vector<int> labels) const;

  friend bool operator==(const DiscreteField&, const DiscreteField&) = default;

 private:
  Dims dims_;
  std::vector<int> labels_;
  int max_label_ = 0;
  std::size_t lattice_size_ = 0;
};

/// Real-valued field; NaN marks pixels outside the lattice.
class RealField {
 public:
  RealField() = default;
  RealField(Dims dims, std::vector<double> values);

  Dims dims() const { return dims_; }
  int rows() const { return dims_.rows; }
  int cols() const { return dims_.cols; }
  double at(int row, int col) const { return values_[dims_.index(row, col)]; }
  double operator[](std::size_t idx) const { return values_[idx]; }
  bool in_lattice(std::size_t idx) const { return !std::isnan(values_[idx]); }
  std::span<const double> values() const { return values_; }
  std::size_t lattice_size() const { return lattice_size_; }
  PixelRegion mask() const;

  friend bool operator==(const RealField& a, const RealField& b);

 private:
  Dims dims_;
  std::vector<double> values_;
  std::size_t lattice_size_ = 0;
};

}  // namespace pairmrf
