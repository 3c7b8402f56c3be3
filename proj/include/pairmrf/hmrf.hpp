#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pairmrf/field.hpp"
#include "pairmrf/interactions.hpp"
#include "pairmrf/potentials.hpp"

namespace pairmrf {

struct MixtureParams {
  std::vector<double> mu;
  std::vector<double> sigma;
  /// Coefficients of the fixed-effect basis.
  std::vector<double> beta;
};

/// Spatial covariates f_j evaluated on every pixel of a grid. No column is
/// constant; the component means play the intercept's role.
class BasisSet {
 public:
  BasisSet() = default;
  BasisSet(Dims dims, std::vector<std::vector<double>> columns, std::vector<std::string> names);

  Dims dims() const { return dims_; }
  std::size_t size() const { return columns_.size(); }
  bool empty() const { return columns_.empty(); }
  double operator()(std::size_t j, std::size_t idx) const { return columns_[j][idx]; }
  const std::vector<double>& column(std::size_t j) const { return columns_[j]; }
  const std::string& name(std::size_t j) const { return names_[j]; }

 private:
  Dims dims_;
  std::vector<std::vector<double>> columns_;
  std::vector<std::string> names_;
};

/// Monomials u1^e1 u2^e2 with 0 <= e <= d, (e1, e2) != (0, 0), where u are
/// pixel coordinates centered on the grid midpoint and scaled to [-1, 1].
/// Ordered by total degree, then by e1 descending.
BasisSet polynomial_basis(int d1, int d2, Dims dims);

/// sin and cos of 2 pi (q1 i1 / N + q2 i2 / M) for 0 <= q <= k, q != (0, 0),
/// with 1-based i. Identically zero columns are dropped.
BasisSet fourier_basis(int k1, int k2, Dims dims);

/// Starting values: type-7 quantiles at (2k+1) / (2(C+1)), sd(y) / (C+1) for
/// every sigma, then an independent-mixture EM refinement.
MixtureParams init_from_quantiles(const RealField& y, int max_label);

struct GhmOptions {
  bool equal_vars = false;
  std::optional<std::vector<double>> init_mus;
  std::optional<std::vector<double>> init_sigmas;
  int maxiter = 100;
  double max_dist = 1e-3;
  int icm_cycles = 6;
};

struct HmrfFit {
  /// Components sorted by mu ascending.
  MixtureParams params;
  /// ICM configuration under the final parameters.
  DiscreteField z_pred;
  /// x_i' beta per pixel.
  RealField fixed;
  /// fixed + mu[z_pred].
  RealField predicted;
  int iterations = 0;
  bool converged = false;
  std::vector<std::int64_t> counts;
  std::size_t n_basis = 0;
  InteractionStructure structure;
};

/// EM for a Gaussian mixture whose labels follow an MRF with fixed potentials.
///
/// Each iteration runs `icm_cycles` raster ICM scans, forms weights
/// w_i(k) ∝ exp(h_i(k | z_hat)) N(y_i; mu_k + x_i' beta, sigma_k^2), and
/// solves the weighted least-squares problem for (mu, beta) before updating
/// sigma. Stops once every |delta mu| and |delta sigma| is below max_dist.
HmrfFit fit_ghm(const RealField& y, const PotentialArray& theta, const std::optional<BasisSet>& basis = std::nullopt,
                const GhmOptions& options = {});

}  // namespace pairmrf
