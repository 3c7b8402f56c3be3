#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pairmrf/field.hpp"
#include "pairmrf/interactions.hpp"
#include "pairmrf/potentials.hpp"

namespace pairmrf {

/// Co-occurrence counts n_{a,b,r}: lattice pixels i with i + r also in the
/// lattice, z_i = a and z_{i+r} = b. Free boundary: pairs leaving the
/// rectangle or touching a masked pixel are not counted.
class CooccurrenceHistogram {
 public:
  CooccurrenceHistogram(InteractionStructure structure, int max_label);

  const InteractionStructure& structure() const { return structure_; }
  int max_label() const { return max_label_; }
  int num_colors() const { return max_label_ + 1; }

  std::int64_t operator()(std::size_t k, int a, int b) const { return counts_[flat(k, a, b)]; }
  std::int64_t& at(std::size_t k, int a, int b) { return counts_[flat(k, a, b)]; }
  /// Flat (k, a, b) order, b fastest.
  std::span<const std::int64_t> counts() const { return counts_; }
  std::int64_t slice_total(std::size_t k) const;

  friend bool operator==(const CooccurrenceHistogram&, const CooccurrenceHistogram&) = default;

 private:
  std::size_t flat(std::size_t k, int a, int b) const {
    return (k * num_colors() + static_cast<std::size_t>(a)) * num_colors() + static_cast<std::size_t>(b);
  }

  InteractionStructure structure_;
  int max_label_;
  std::vector<std::int64_t> counts_;
};

/// `max_label < 0` uses the field's C.
CooccurrenceHistogram cohist(const DiscreteField& z, const InteractionStructure& structure, int max_label = -1);

/// Sums histogram entries per free parameter of `family`, dropping entries
/// whose potential is fixed at zero. Aligned with summarize_array().
std::vector<double> aggregate_statistics(const CooccurrenceHistogram& hist, Family family);

/// Sufficient statistic S(z) of a family. Throws if z has labels above C.
std::vector<double> suff_stat(const DiscreteField& z, const InteractionStructure& structure, Family family,
                              int max_label);

/// H(z, theta) = sum_r sum_{a,b} theta_r(a,b) n_{a,b,r}(z).
double energy(const DiscreteField& z, const PotentialArray& theta);

/// Evaluates h_i(k | z) for every k at lattice pixels of a fixed-size grid.
///
/// Keeps per-position flat offsets and both orientations of each potential
/// slice so one call costs O(|R| (C+1)).
class LocalFieldKernel {
 public:
  LocalFieldKernel(const PotentialArray& theta, Dims dims);

  int num_colors() const { return n_; }
  Dims dims() const { return dims_; }

  /// `labels` is a full grid in row-major order with kMasked outside the
  /// lattice; `h` receives C+1 values.
  void compute(std::span<const int> labels, int row, int col, std::span<double> h) const;

  /// Calls fn(k, label, forward) for every lattice neighbor of (row, col):
  /// forward is true for i + r_k and false for i - r_k.
  template <typename Fn>
  void for_each_neighbor(std::span<const int> labels, int row, int col, Fn&& fn) const {
    const std::size_t here = dims_.index(row, col);
    for (std::size_t k = 0; k < steps_.size(); ++k) {
      const Step& s = steps_[k];
      if (dims_.contains(row + s.dr, col + s.dc)) {
        const int lab = labels[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(here) + s.flat)];
        if (lab >= 0) fn(k, lab, true);
      }
      if (dims_.contains(row - s.dr, col - s.dc)) {
        const int lab = labels[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(here) - s.flat)];
        if (lab >= 0) fn(k, lab, false);
      }
    }
  }

 private:
  struct Step {
    int dr;
    int dc;
    std::ptrdiff_t flat;
  };

  Dims dims_;
  int n_;
  std::vector<Step> steps_;
  std::vector<double> forward_;   // [k][b][x] = theta_k(x, b)
  std::vector<double> backward_;  // [k][a][x] = theta_k(a, x)
};

/// h_i(k | z) for k = 0..C. The pixel must be in the lattice.
std::vector<double> local_field(const DiscreteField& z, Pixel i, const PotentialArray& theta);

/// Softmax of the local field: P(Z_i = k | rest).
std::vector<double> conditional_probs(const DiscreteField& z, Pixel i, const PotentialArray& theta);

/// In-place max-shifted softmax; returns log-sum-exp of the input.
double softmax_inplace(std::span<double> h);

/// log PL(theta; z) = sum_i [h_i(z_i) - logsumexp_k h_i(k)].
double pseudo_likelihood(const DiscreteField& z, const PotentialArray& theta, int threads = 1);

/// Gradient of log PL with respect to the family's free parameters.
std::vector<double> pl_gradient(const DiscreteField& z, std::span<const double> theta_vec, Family family,
                                const InteractionStructure& structure, int max_label, int threads = 1);

struct PlValue {
  double log_pl = 0.0;
  std::vector<double> gradient;
};

/// log PL and its gradient in one pass. Pixels are reduced in fixed-size
/// chunks combined in order, so the result does not depend on `threads`.
PlValue evaluate_pl(const DiscreteField& z, const PotentialArray& theta, bool with_gradient, int threads = 1);

}  // namespace pairmrf
