#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pairmrf/field.hpp"
#include "pairmrf/interactions.hpp"
#include "pairmrf/potentials.hpp"

namespace pairmrf {

enum class FitMethod { PseudoLikelihood, StochasticApproximation };

struct MetricPoint {
  int iteration = 0;
  double distance = 0.0;
};

struct MrfFit {
  PotentialArray theta;
  FitMethod method = FitMethod::PseudoLikelihood;
  /// log PL at the returned potentials.
  std::optional<double> log_pl;
  /// SA: ||S(z0) - S(z_t)||_2 per iteration.
  std::vector<MetricPoint> metrics;
  std::vector<std::int64_t> color_counts;
  Dims dims;
  int iterations = 0;
  /// PL: infinity norm of the gradient at the solution.
  double gradient_norm = 0.0;

  Family family() const { return theta.family(); }
  const InteractionStructure& structure() const { return theta.structure(); }
};

/// Thrown when an optimizer stops before meeting its tolerance; carries the
/// last iterate.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, MrfFit partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const MrfFit& partial() const { return partial_; }

 private:
  MrfFit partial_;
};

struct PlOptions {
  double gtol = 1e-5;
  int max_iterations = 500;
  int threads = 1;
};

/// Maximum pseudo-likelihood by BFGS on the free parameters.
///
/// Stops when the gradient of log PL has infinity norm <= gtol. Requires at
/// least two distinct labels in z; `init` defaults to zero potentials.
MrfFit fit_pl(const DiscreteField& z, const InteractionStructure& structure, Family family,
              const PlOptions& options = {}, const std::optional<PotentialArray>& init = std::nullopt);

/// seq(from, to, length.out = length).
std::vector<double> linear_sequence(double from, double to, int length);

struct SaOptions {
  /// Step sizes before division by the lattice size; defaults to 1 -> 0 over 300 steps.
  std::vector<double> gamma_seq = linear_sequence(1.0, 0.0, 300);
  int cycles = 2;
  /// Restart period; 0 means never.
  int refresh_each = 0;
  int refresh_cycles = 60;
  std::uint64_t seed = 0;
};

/// Stochastic approximation to the MLE:
///   theta <- theta + gamma_t / |L| * (S(z0) - S(z_t)),
/// with z_t drawn by `cycles` Gibbs cycles from z_{t-1} under the current
/// theta. The chain starts at z0.
MrfFit fit_sa(const DiscreteField& z, const InteractionStructure& structure, Family family,
              const SaOptions& options = {}, const std::optional<PotentialArray>& init = std::nullopt);

struct Selection {
  InteractionStructure structure;
  MrfFit fit;
  /// Per-candidate max |free parameter|, aligned with the candidate structure.
  std::vector<double> strength;
};

/// Runs fit_sa on the candidates and keeps positions whose largest absolute
/// free parameter exceeds `threshold` (strictly). Throws if none survive.
Selection select_interactions(const DiscreteField& z, const InteractionStructure& candidates, Family family,
                              const SaOptions& options, double threshold);

/// Max |free parameter| owned by each position (the shared onepar value for all).
std::vector<double> position_strength(const PotentialArray& theta);

}  // namespace pairmrf
