#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pairmrf/field.hpp"
#include "pairmrf/kernel.hpp"
#include "pairmrf/potentials.hpp"
#include "pairmrf/rng.hpp"

namespace pairmrf {

struct SamplerConfig {
  /// Number of full Gibbs scans.
  int cycles = 60;
  std::uint64_t seed = 0;
  /// Pixels kept at their initial value.
  std::optional<PixelRegion> fixed_region;
  /// Lattice support when sampling from dimensions; false pixels are left out.
  std::optional<PixelRegion> sub_region;
};

/// Single-site Gibbs sampler with a fresh random scan order per cycle.
///
/// Each cycle visits every free pixel (in the lattice and not fixed) exactly
/// once, in a uniformly random permutation, and redraws it from its full
/// conditional given the current state.
class GibbsChain {
 public:
  GibbsChain(const DiscreteField& init, const PotentialArray& theta,
             const std::optional<PixelRegion>& fixed_region = std::nullopt);

  void run(int cycles, Rng& rng);

  /// Redraws every free pixel i.i.d. uniform on {0..C}.
  void randomize(Rng& rng);

  /// New potentials over the same structure and C.
  void set_theta(const PotentialArray& theta);

  /// Maintains the co-occurrence histogram incrementally from here on.
  void track_histogram();
  const CooccurrenceHistogram& histogram() const;

  DiscreteField field() const;
  std::span<const int> labels() const { return labels_; }
  std::size_t free_pixels() const { return free_.size(); }
  /// Total single-site updates performed so far.
  std::uint64_t updates() const { return updates_; }

 private:
  void set_label(std::size_t idx, int row, int col, int value);

  DiscreteField prototype_;
  PotentialArray theta_;
  LocalFieldKernel kernel_;
  std::vector<int> labels_;
  std::vector<std::uint32_t> free_;
  std::optional<CooccurrenceHistogram> hist_;
  std::uint64_t updates_ = 0;
};

/// Runs `config.cycles` cycles from an initial configuration.
DiscreteField sample_mrf(const DiscreteField& init, const PotentialArray& theta, const SamplerConfig& config);

/// Starts from labels drawn i.i.d. uniform on {0..C} over `dims` (restricted
/// to config.sub_region when given).
DiscreteField sample_mrf(Dims dims, const PotentialArray& theta, const SamplerConfig& config);

/// Samples the pixels outside config.fixed_region given the values of `z`
/// inside it. An empty fixed region reduces to sample_mrf.
DiscreteField sample_conditional(const DiscreteField& z, const PotentialArray& theta, const SamplerConfig& config);

}  // namespace pairmrf
