#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "pairmrf/field.hpp"
#include "pairmrf/potentials.hpp"

namespace pairmrf {

/// Largest number of configurations the exact routines will enumerate.
inline constexpr std::uint64_t kExactLimit = std::uint64_t{1} << 22;

/// The data sit on the boundary of the statistic's support, so the MLE lies
/// at infinity.
class BoundaryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Full joint distribution of a small, unmasked lattice by enumeration.
///
/// Configuration index c encodes pixel p (row-major) as digit p of c in base
/// C+1, pixel 0 least significant.
class ExactModel {
 public:
  ExactModel(Dims dims, const PotentialArray& theta);

  Dims dims() const { return dims_; }
  std::uint64_t configurations() const { return total_; }
  double log_partition() const { return log_zeta_; }

  /// Labels of configuration c.
  std::vector<int> decode(std::uint64_t c) const;
  std::uint64_t encode(std::span<const int> labels) const;
  /// H(z, theta) by a direct loop over interacting pairs.
  double energy(std::span<const int> labels) const;
  /// P(z) for every configuration.
  std::vector<double> probabilities() const;
  /// E[S(Z)] for the potentials' family.
  std::vector<double> expected_stats() const;
  /// Cov[S(Z)], row-major dim x dim.
  std::vector<double> stats_covariance() const;
  /// Family statistic of one configuration, accumulated into `out`.
  void add_stats(std::span<const int> labels, std::span<double> out, double weight) const;

 private:
  struct Pair {
    std::uint32_t i;
    std::uint32_t j;
    std::uint32_t k;
  };
  void for_each(const std::function<void(std::span<const int>, double)>& fn) const;

  Dims dims_;
  PotentialArray theta_;
  ParameterMap map_;
  std::uint64_t total_ = 0;
  std::vector<Pair> pairs_;
  double log_zeta_ = 0.0;
};

/// log of the partition function by enumeration.
double partition_function(Dims dims, const PotentialArray& theta);

/// log of the partition function by a recursion over rows. Every position must
/// have a row offset of 0 or 1, and (C+1)^(2 cols) must respect kExactLimit.
double partition_function_rows(Dims dims, const PotentialArray& theta);

/// P(Z_i = k | rest) taken from ratios of the exact joint.
std::vector<double> exact_conditional(const DiscreteField& z, Pixel i, const PotentialArray& theta);

/// E_theta[S(Z)] over an unmasked lattice.
std::vector<double> exact_expected_stats(Dims dims, const PotentialArray& theta);

struct ExactMleOptions {
  double tolerance = 1e-10;
  int max_iterations = 200;
  /// Any |theta| beyond this is taken as divergence to the boundary.
  double divergence_bound = 40.0;
};

/// Solves E_theta[S] = S(z) by damped Newton steps. Throws BoundaryError when
/// the estimate runs off to infinity.
std::vector<double> exact_mle(const DiscreteField& z, const InteractionStructure& structure, Family family,
                              const ExactMleOptions& options = {});

}  // namespace pairmrf
