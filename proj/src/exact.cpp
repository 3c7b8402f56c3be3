#include "pairmrf/exact.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pairmrf/kernel.hpp"

namespace pairmrf {

namespace {

std::uint64_t checked_power(int base, std::size_t exponent) {
  std::uint64_t total = 1;
  for (std::size_t p = 0; p < exponent; ++p) {
    total *= static_cast<std::uint64_t>(base);
    if (total > kExactLimit) {
      throw std::invalid_argument("lattice too large for exact enumeration (limit 2^22 configurations)");
    }
  }
  return total;
}

/// Running log-sum-exp.
class LogSum {
 public:
  void add(double v) {
    if (v == -std::numeric_limits<double>::infinity()) return;
    if (v > top_) {
      sum_ = sum_ * std::exp(top_ - v) + 1.0;
      top_ = v;
    } else {
      sum_ += std::exp(v - top_);
    }
  }
  double value() const { return top_ + std::log(sum_); }

 private:
  double top_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
};

}  // namespace

ExactModel::ExactModel(Dims dims, const PotentialArray& theta)
    : dims_(dims), theta_(theta), map_(theta.family(), theta.n_positions(), theta.max_label()) {
  if (dims.rows <= 0 || dims.cols <= 0) throw std::invalid_argument("lattice must be non-empty");
  total_ = checked_power(theta.num_colors(), dims.size());
  for (std::size_t k = 0; k < theta.n_positions(); ++k) {
    const Offset r = theta.structure()[k];
    for (int i1 = 0; i1 < dims.rows; ++i1) {
      for (int i2 = 0; i2 < dims.cols; ++i2) {
        if (!dims.contains(i1 + r.row, i2 + r.col)) continue;
        pairs_.push_back({static_cast<std::uint32_t>(dims.index(i1, i2)),
                          static_cast<std::uint32_t>(dims.index(i1 + r.row, i2 + r.col)),
                          static_cast<std::uint32_t>(k)});
      }
    }
  }
  LogSum acc;
  for_each([&](std::span<const int>, double h) { acc.add(h); });
  log_zeta_ = acc.value();
}

std::vector<int> ExactModel::decode(std::uint64_t c) const {
  const auto base = static_cast<std::uint64_t>(theta_.num_colors());
  std::vector<int> labels(dims_.size());
  for (auto& v : labels) {
    v = static_cast<int>(c % base);
    c /= base;
  }
  return labels;
}

std::uint64_t ExactModel::encode(std::span<const int> labels) const {
  const auto base = static_cast<std::uint64_t>(theta_.num_colors());
  std::uint64_t c = 0;
  for (std::size_t p = labels.size(); p-- > 0;) c = c * base + static_cast<std::uint64_t>(labels[p]);
  return c;
}

double ExactModel::energy(std::span<const int> labels) const {
  double h = 0.0;
  for (const Pair& p : pairs_) h += theta_(p.k, labels[p.i], labels[p.j]);
  return h;
}

void ExactModel::add_stats(std::span<const int> labels, std::span<double> out, double weight) const {
  for (const Pair& p : pairs_) {
    const int m = map_(p.k, labels[p.i], labels[p.j]);
    if (m >= 0) out[static_cast<std::size_t>(m)] += weight;
  }
}

void ExactModel::for_each(const std::function<void(std::span<const int>, double)>& fn) const {
  const int base = theta_.num_colors();
  std::vector<int> labels(dims_.size(), 0);
  for (std::uint64_t c = 0; c < total_; ++c) {
    fn(labels, energy(labels));
    // Mixed-radix increment, pixel 0 fastest.
    for (auto& v : labels) {
      if (++v < base) break;
      v = 0;
    }
  }
}

std::vector<double> ExactModel::probabilities() const {
  std::vector<double> out;
  out.reserve(total_);
  for_each([&](std::span<const int>, double h) { out.push_back(std::exp(h - log_zeta_)); });
  return out;
}

std::vector<double> ExactModel::expected_stats() const {
  std::vector<double> out(map_.dimension(), 0.0);
  for_each([&](std::span<const int> labels, double h) { add_stats(labels, out, std::exp(h - log_zeta_)); });
  return out;
}

std::vector<double> ExactModel::stats_covariance() const {
  // Two passes: centering first avoids cancellation when the law concentrates.
  const std::vector<double> mean = expected_stats();
  const std::size_t dim = mean.size();
  std::vector<double> cov(dim * dim, 0.0);
  std::vector<double> s(dim);
  for_each([&](std::span<const int> labels, double h) {
    const double w = std::exp(h - log_zeta_);
    std::fill(s.begin(), s.end(), 0.0);
    add_stats(labels, s, 1.0);
    for (std::size_t a = 0; a < dim; ++a) s[a] -= mean[a];
    for (std::size_t a = 0; a < dim; ++a) {
      for (std::size_t b = 0; b < dim; ++b) cov[a * dim + b] += w * s[a] * s[b];
    }
  });
  return cov;
}

double partition_function(Dims dims, const PotentialArray& theta) { return ExactModel(dims, theta).log_partition(); }

double partition_function_rows(Dims dims, const PotentialArray& theta) {
  if (dims.rows <= 0 || dims.cols <= 0) throw std::invalid_argument("lattice must be non-empty");
  for (const Offset r : theta.structure().positions()) {
    if (r.row != 0 && r.row != 1) throw std::invalid_argument("row recursion needs positions spanning at most 2 rows");
  }
  const int base = theta.num_colors();
  const std::uint64_t states = checked_power(base, static_cast<std::size_t>(dims.cols));
  checked_power(base, 2 * static_cast<std::size_t>(dims.cols));

  std::vector<std::vector<int>> rows(states, std::vector<int>(static_cast<std::size_t>(dims.cols)));
  for (std::uint64_t s = 0; s < states; ++s) {
    std::uint64_t c = s;
    for (auto& v : rows[s]) {
      v = static_cast<int>(c % static_cast<std::uint64_t>(base));
      c /= static_cast<std::uint64_t>(base);
    }
  }
  // Energy inside one row and between consecutive rows.
  std::vector<double> within(states, 0.0);
  std::vector<double> between(states * states, 0.0);
  for (std::size_t k = 0; k < theta.n_positions(); ++k) {
    const Offset r = theta.structure()[k];
    for (int col = 0; col < dims.cols; ++col) {
      const int other = col + r.col;
      if (other < 0 || other >= dims.cols) continue;
      for (std::uint64_t s = 0; s < states; ++s) {
        if (r.row == 0) {
          within[s] += theta(k, rows[s][static_cast<std::size_t>(col)], rows[s][static_cast<std::size_t>(other)]);
          continue;
        }
        for (std::uint64_t t = 0; t < states; ++t) {
          between[s * states + t] +=
              theta(k, rows[s][static_cast<std::size_t>(col)], rows[t][static_cast<std::size_t>(other)]);
        }
      }
    }
  }
  std::vector<double> alpha(within);
  std::vector<double> next(states);
  for (int row = 1; row < dims.rows; ++row) {
    for (std::uint64_t t = 0; t < states; ++t) {
      LogSum acc;
      for (std::uint64_t s = 0; s < states; ++s) acc.add(alpha[s] + between[s * states + t]);
      next[t] = acc.value() + within[t];
    }
    alpha.swap(next);
  }
  LogSum total;
  for (double a : alpha) total.add(a);
  return total.value();
}

std::vector<double> exact_conditional(const DiscreteField& z, Pixel i, const PotentialArray& theta) {
  if (z.lattice_size() != z.dims().size()) throw std::invalid_argument("exact routines need an unmasked lattice");
  if (!z.dims().contains(i.row, i.col)) throw std::out_of_range("pixel is out of bounds");
  if (z.max_label() > theta.max_label()) throw std::invalid_argument("field labels exceed the potentials' C");
  const ExactModel model(z.dims(), theta);
  std::vector<int> labels(z.labels().begin(), z.labels().end());
  const std::size_t idx = z.dims().index(i.row, i.col);
  std::vector<double> joint(static_cast<std::size_t>(theta.num_colors()));
  double total = 0.0;
  for (int k = 0; k < theta.num_colors(); ++k) {
    labels[idx] = k;
    joint[static_cast<std::size_t>(k)] = std::exp(model.energy(labels) - model.log_partition());
    total += joint[static_cast<std::size_t>(k)];
  }
  for (auto& p : joint) p /= total;
  return joint;
}

std::vector<double> exact_expected_stats(Dims dims, const PotentialArray& theta) {
  return ExactModel(dims, theta).expected_stats();
}

std::vector<double> exact_mle(const DiscreteField& z, const InteractionStructure& structure, Family family,
                              const ExactMleOptions& options) {
  if (z.lattice_size() != z.dims().size()) throw std::invalid_argument("exact routines need an unmasked lattice");
  const int max_label = z.max_label();
  if (max_label < 1) throw BoundaryError("a single-label field puts the MLE at infinity");
  const auto s0 = suff_stat(z, structure, family, max_label);
  const auto dim = static_cast<Eigen::Index>(s0.size());
  const Eigen::Map<const Eigen::VectorXd> target(s0.data(), dim);

  auto model_at = [&](const Eigen::VectorXd& v) {
    return ExactModel(z.dims(), expand_array(std::span<const double>(v.data(), static_cast<std::size_t>(dim)),
                                             family, structure, max_label));
  };
  // Log-likelihood <x, S0> - log zeta is concave in x.
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
  ExactModel model = model_at(x);
  double ll = -model.log_partition();
  double scale = 1.0;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    const auto mean = model.expected_stats();
    const Eigen::VectorXd grad = target - Eigen::Map<const Eigen::VectorXd>(mean.data(), dim);
    const auto cov = model.stats_covariance();
    const Eigen::MatrixXd hess = Eigen::Map<const Eigen::MatrixXd>(cov.data(), dim, dim);
    // The Fisher information decays exponentially along a direction of
    // recession; past a relative 1e-10 the statistic is on the boundary.
    const double smallest = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(hess, Eigen::EigenvaluesOnly)
                                .eigenvalues()
                                .minCoeff();
    if (iter == 0) scale = std::max(hess.diagonal().maxCoeff(), std::numeric_limits<double>::min());
    if (smallest < 1e-10 * scale) {
      throw BoundaryError("Fisher information collapses: the observed statistic lies on the boundary of its support");
    }
    Eigen::VectorXd step = hess.ldlt().solve(grad);
    if (!step.allFinite() || step.dot(grad) <= 0) step = grad;
    // Near the boundary the gradient vanishes exponentially while Newton
    // steps stay O(1), so both must be small.
    if (grad.lpNorm<Eigen::Infinity>() < options.tolerance && step.lpNorm<Eigen::Infinity>() < 1e-6) {
      return std::vector<double>(x.data(), x.data() + dim);
    }
    bool moved = false;
    double t = 1.0;
    for (int half = 0; half < 60 && !moved; ++half, t *= 0.5) {
      const Eigen::VectorXd cand = x + t * step;
      ExactModel next = model_at(cand);
      const double cand_ll = cand.dot(target) - next.log_partition();
      if (cand_ll >= ll - 1e-12 * (1.0 + std::abs(ll))) {
        x = cand;
        ll = cand_ll;
        model = std::move(next);
        moved = true;
      }
    }
    if (x.lpNorm<Eigen::Infinity>() > options.divergence_bound) {
      throw BoundaryError("MLE diverges: the observed statistic lies on the boundary of its support");
    }
    if (!moved) break;
  }
  throw BoundaryError("Newton iterations did not reach the likelihood equations; the MLE may be at infinity");
}

}  // namespace pairmrf
