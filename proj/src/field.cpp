#include "pairmrf/field.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace pairmrf {

namespace {

void check_dims(Dims dims) {
  if (dims.rows <= 0 || dims.cols <= 0) {
    throw std::invalid_argument("field dimensions must be positive, got " + std::to_string(dims.rows) + "x" +
                                std::to_string(dims.cols));
  }
}

}  // namespace

PixelRegion::PixelRegion(Dims dims, bool fill) : dims_(dims), flags_(dims.size(), fill ? 1 : 0) {
  check_dims(dims);
}

PixelRegion::PixelRegion(Dims dims, std::vector<std::uint8_t> flags) : dims_(dims), flags_(std::move(flags)) {
  check_dims(dims);
  if (flags_.size() != dims.size()) throw std::invalid_argument("region size does not match its dimensions");
  for (auto& f : flags_) f = f != 0 ? 1 : 0;
}

std::size_t PixelRegion::count() const {
  return static_cast<std::size_t>(std::count(flags_.begin(), flags_.end(), std::uint8_t{1}));
}

DiscreteField::DiscreteField(Dims dims, std::vector<int> labels, int max_label)
    : dims_(dims), labels_(std::move(labels)) {
  check_dims(dims);
  if (labels_.size() != dims.size()) throw std::invalid_argument("label count does not match field dimensions");
  int observed = -1;
  for (int v : labels_) {
    if (v < kMasked) throw std::invalid_argument("negative label " + std::to_string(v));
    if (v != kMasked) {
      ++lattice_size_;
      observed = std::max(observed, v);
    }
  }
  if (lattice_size_ == 0) throw std::invalid_argument("field has no pixel inside the lattice");
  if (max_label < 0) {
    max_label_ = observed;
  } else {
    if (observed > max_label) {
      throw std::invalid_argument("label " + std::to_string(observed) + " exceeds declared maximum " +
                                  std::to_string(max_label));
    }
    max_label_ = max_label;
  }
}

PixelRegion DiscreteField::mask() const {
  std::vector<std::uint8_t> flags(labels_.size());
  std::transform(labels_.begin(), labels_.end(), flags.begin(), [](int v) { return v != kMasked ? 1 : 0; });
  return PixelRegion(dims_, std::move(flags));
}

std::vector<std::int64_t> DiscreteField::color_counts() const {
  std::vector<std::int64_t> counts(static_cast<std::size_t>(num_colors()), 0);
  for (int v : labels_) {
    if (v != kMasked) ++counts[static_cast<std::size_t>(v)];
  }
  return counts;
}

int DiscreteField::distinct_labels() const {
  const auto counts = color_counts();
  return static_cast<int>(std::count_if(counts.begin(), counts.end(), [](std::int64_t c) { return c > 0; }));
}

DiscreteField DiscreteField::with_labels(std::vector<int> labels) const {
  if (labels.size() != labels_.size()) throw std::invalid_argument("label count does not match field dimensions");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if ((labels[i] == kMasked) != (labels_[i] == kMasked)) {
      throw std::invalid_argument("new labels do not preserve the lattice mask");
    }
  }
  return DiscreteField(dims_, std::move(labels), max_label_);
}

RealField::RealField(Dims dims, std::vector<double> values) : dims_(dims), values_(std::move(values)) {
  check_dims(dims);
  if (values_.size() != dims.size()) throw std::invalid_argument("value count does not match field dimensions");
  for (double v : values_) {
    if (std::isnan(v)) continue;
    if (!std::isfinite(v)) throw std::invalid_argument("real field values must be finite");
    ++lattice_size_;
  }
  if (lattice_size_ == 0) throw std::invalid_argument("field has no pixel inside the lattice");
}

PixelRegion RealField::mask() const {
  std::vector<std::uint8_t> flags(values_.size());
  std::transform(values_.begin(), values_.end(), flags.begin(), [](double v) { return std::isnan(v) ? 0 : 1; });
  return PixelRegion(dims_, std::move(flags));
}

bool operator==(const RealField& a, const RealField& b) {
  if (a.dims_ != b.dims_) return false;
  for (std::size_t i = 0; i < a.values_.size(); ++i) {
    const double x = a.values_[i];
    const double y = b.values_[i];
    if (std::isnan(x) != std::isnan(y)) return false;
    if (!std::isnan(x) && x != y) return false;
  }
  return true;
}

}  // namespace pairmrf
