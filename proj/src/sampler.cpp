#include "pairmrf/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pairmrf {

namespace {

DiscreteField with_max_label(const DiscreteField& z, int max_label) {
  if (z.max_label() > max_label) {
    throw std::invalid_argument("initial field uses label " + std::to_string(z.max_label()) +
                                " but potentials are defined for C = " + std::to_string(max_label));
  }
  if (z.max_label() == max_label) return z;
  return DiscreteField(z.dims(), std::vector<int>(z.labels().begin(), z.labels().end()), max_label);
}

}  // namespace

GibbsChain::GibbsChain(const DiscreteField& init, const PotentialArray& theta,
                       const std::optional<PixelRegion>& fixed_region)
    : prototype_(with_max_label(init, theta.max_label())),
      theta_(theta),
      kernel_(theta, init.dims()),
      labels_(init.labels().begin(), init.labels().end()) {
  if (fixed_region && fixed_region->dims() != init.dims()) {
    throw std::invalid_argument("fixed region dimensions do not match the field");
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const bool fixed = fixed_region && (*fixed_region)[i];
    if (labels_[i] == DiscreteField::kMasked) {
      if (fixed) throw std::invalid_argument("fixed region includes pixels outside the lattice");
      continue;
    }
    if (!fixed) free_.push_back(static_cast<std::uint32_t>(i));
  }
}

void GibbsChain::set_theta(const PotentialArray& theta) {
  if (!(theta.structure() == theta_.structure()) || theta.max_label() != theta_.max_label()) {
    throw std::invalid_argument("new potentials must share the chain's structure and C");
  }
  theta_ = theta;
  kernel_ = LocalFieldKernel(theta, prototype_.dims());
}

void GibbsChain::track_histogram() {
  hist_ = cohist(DiscreteField(prototype_.dims(), labels_, prototype_.max_label()), theta_.structure(),
                 theta_.max_label());
}

const CooccurrenceHistogram& GibbsChain::histogram() const {
  if (!hist_) throw std::logic_error("histogram tracking is not enabled");
  return *hist_;
}

DiscreteField GibbsChain::field() const { return DiscreteField(prototype_.dims(), labels_, prototype_.max_label()); }

void GibbsChain::set_label(std::size_t idx, int row, int col, int value) {
  const int old = labels_[idx];
  if (old == value) return;
  if (hist_) {
    kernel_.for_each_neighbor(labels_, row, col, [&](std::size_t k, int lab, bool forward) {
      if (forward) {
        --hist_->at(k, old, lab);
        ++hist_->at(k, value, lab);
      } else {
        --hist_->at(k, lab, old);
        ++hist_->at(k, lab, value);
      }
    });
  }
  labels_[idx] = value;
}

void GibbsChain::randomize(Rng& rng) {
  const auto n = static_cast<std::uint64_t>(theta_.num_colors());
  const int cols = prototype_.cols();
  for (const std::uint32_t idx : free_) {
    set_label(idx, static_cast<int>(idx) / cols, static_cast<int>(idx) % cols, static_cast<int>(rng.below(n)));
  }
}

void GibbsChain::run(int cycles, Rng& rng) {
  if (cycles < 0) throw std::invalid_argument("cycles must be non-negative");
  const int n = theta_.num_colors();
  const int cols = prototype_.cols();
  std::vector<double> h(static_cast<std::size_t>(n));
  for (int t = 0; t < cycles; ++t) {
    // Fisher-Yates; shuffling the previous order still yields a uniform permutation.
    for (std::size_t i = free_.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(rng.below(i));
      std::swap(free_[i - 1], free_[j]);
    }
    for (const std::uint32_t idx : free_) {
      const int row = static_cast<int>(idx) / cols;
      const int col = static_cast<int>(idx) % cols;
      kernel_.compute(labels_, row, col, h);
      double top = h[0];
      for (int x = 1; x < n; ++x) top = std::max(top, h[static_cast<std::size_t>(x)]);
      double total = 0.0;
      for (auto& v : h) {
        v = std::exp(v - top);
        total += v;
      }
      const double u = rng.uniform() * total;
      int pick = n - 1;
      double cum = 0.0;
      for (int x = 0; x < n - 1; ++x) {
        cum += h[static_cast<std::size_t>(x)];
        if (u < cum) {
          pick = x;
          break;
        }
      }
      set_label(idx, row, col, pick);
      ++updates_;
    }
  }
}

DiscreteField sample_mrf(const DiscreteField& init, const PotentialArray& theta, const SamplerConfig& config) {
  if (config.sub_region) {
    throw std::invalid_argument("sub_region applies only when sampling from dimensions");
  }
  Rng rng(config.seed);
  GibbsChain chain(init, theta, config.fixed_region);
  chain.run(config.cycles, rng);
  return chain.field();
}

DiscreteField sample_mrf(Dims dims, const PotentialArray& theta, const SamplerConfig& config) {
  if (config.sub_region && config.sub_region->dims() != dims) {
    throw std::invalid_argument("sub_region dimensions do not match the requested field");
  }
  if (config.sub_region && config.sub_region->count() == 0) {
    throw std::invalid_argument("sub_region selects no pixel");
  }
  Rng rng(config.seed);
  const auto n = static_cast<std::uint64_t>(theta.num_colors());
  std::vector<int> labels(dims.size(), DiscreteField::kMasked);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!config.sub_region || (*config.sub_region)[i]) labels[i] = static_cast<int>(rng.below(n));
  }
  const DiscreteField init(dims, std::move(labels), theta.max_label());
  GibbsChain chain(init, theta, config.fixed_region);
  chain.run(config.cycles, rng);
  return chain.field();
}

DiscreteField sample_conditional(const DiscreteField& z, const PotentialArray& theta, const SamplerConfig& config) {
  return sample_mrf(z, theta, config);
}

}  // namespace pairmrf
