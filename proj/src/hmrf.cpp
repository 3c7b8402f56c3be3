#include "pairmrf/hmrf.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "pairmrf/kernel.hpp"

namespace pairmrf {

BasisSet::BasisSet(Dims dims, std::vector<std::vector<double>> columns, std::vector<std::string> names)
    : dims_(dims), columns_(std::move(columns)), names_(std::move(names)) {
  if (names_.size() != columns_.size()) throw std::invalid_argument("one name per basis column");
  for (const auto& c : columns_) {
    if (c.size() != dims.size()) throw std::invalid_argument("basis column does not cover the grid");
  }
}

namespace {

/// Coordinate of index i on an axis of length n, mapped to [-1, 1].
double scaled_coordinate(int i, int n) {
  const double half = (n - 1) / 2.0;
  return half > 0 ? (i - half) / half : 0.0;
}

}  // namespace

BasisSet polynomial_basis(int d1, int d2, Dims dims) {
  if (d1 < 0 || d2 < 0) throw std::invalid_argument("polynomial degrees must be non-negative");
  if (d1 == 0 && d2 == 0) throw std::invalid_argument("polynomial basis of degree (0,0) is empty");
  std::vector<std::vector<double>> columns;
  std::vector<std::string> names;
  for (int total = 1; total <= d1 + d2; ++total) {
    for (int e1 = std::min(total, d1); e1 >= 0; --e1) {
      const int e2 = total - e1;
      if (e2 > d2) break;
      std::vector<double> col(dims.size());
      for (int r = 0; r < dims.rows; ++r) {
        const double u1 = std::pow(scaled_coordinate(r, dims.rows), e1);
        for (int c = 0; c < dims.cols; ++c) {
          col[dims.index(r, c)] = u1 * std::pow(scaled_coordinate(c, dims.cols), e2);
        }
      }
      columns.push_back(std::move(col));
      names.push_back("x^" + std::to_string(e1) + " y^" + std::to_string(e2));
    }
  }
  return BasisSet(dims, std::move(columns), std::move(names));
}

BasisSet fourier_basis(int k1, int k2, Dims dims) {
  if (k1 < 0 || k2 < 0) throw std::invalid_argument("frequencies must be non-negative");
  if (k1 == 0 && k2 == 0) throw std::invalid_argument("Fourier basis with frequencies (0,0) is empty");
  std::vector<std::vector<double>> columns;
  std::vector<std::string> names;
  for (int q1 = 0; q1 <= k1; ++q1) {
    for (int q2 = 0; q2 <= k2; ++q2) {
      if (q1 == 0 && q2 == 0) continue;
      std::vector<double> s(dims.size());
      std::vector<double> c(dims.size());
      for (int r = 0; r < dims.rows; ++r) {
        for (int col = 0; col < dims.cols; ++col) {
          const double arg = 2.0 * std::numbers::pi *
                             (q1 * static_cast<double>(r + 1) / dims.rows + q2 * static_cast<double>(col + 1) / dims.cols);
          s[dims.index(r, col)] = std::sin(arg);
          c[dims.index(r, col)] = std::cos(arg);
        }
      }
      const std::string tag = "(" + std::to_string(q1) + "," + std::to_string(q2) + ")";
      for (auto [vals, name] : {std::pair{&s, "sin"}, std::pair{&c, "cos"}}) {
        const double peak = std::transform_reduce(vals->begin(), vals->end(), 0.0,
                                                  [](double a, double b) { return std::max(a, b); },
                                                  [](double v) { return std::abs(v); });
        if (peak < 1e-9) continue;
        columns.push_back(std::move(*vals));
        names.push_back(std::string(name) + tag);
      }
    }
  }
  if (columns.empty()) throw std::invalid_argument("Fourier basis is empty on this grid");
  return BasisSet(dims, std::move(columns), std::move(names));
}

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double log_normal(double y, double mean, double sigma) {
  const double r = (y - mean) / sigma;
  return -0.5 * r * r - std::log(sigma) - kLogSqrt2Pi;
}

/// Observed pixels and their basis rows.
struct Data {
  Dims dims;
  std::vector<std::size_t> index;  // grid index of each observation
  std::vector<double> y;
  Eigen::MatrixXd x;  // n x p

  std::size_t n() const { return y.size(); }
};

Data collect(const RealField& y, const std::optional<BasisSet>& basis) {
  Data d;
  d.dims = y.dims();
  for (std::size_t i = 0; i < y.values().size(); ++i) {
    if (!y.in_lattice(i)) continue;
    d.index.push_back(i);
    d.y.push_back(y[i]);
  }
  if (d.y.empty()) throw std::invalid_argument("observed field has no pixels");
  const std::size_t p = basis ? basis->size() : 0;
  if (basis && basis->dims() != y.dims()) throw std::invalid_argument("basis grid does not match the field");
  d.x.resize(static_cast<Eigen::Index>(d.n()), static_cast<Eigen::Index>(p));
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = 0; i < d.n(); ++i) {
      d.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (*basis)(j, d.index[i]);
    }
  }
  return d;
}

class Em {
 public:
  Em(const Data& data, const PotentialArray* theta, int n_colors, bool equal_vars, int icm_cycles)
      : data_(data), theta_(theta), n_colors_(n_colors), equal_vars_(equal_vars), icm_cycles_(icm_cycles) {
    if (theta_) kernel_.emplace(*theta_, data.dims);
    labels_.assign(data.dims.size(), DiscreteField::kMasked);
  }

  const std::vector<int>& labels() const { return labels_; }

  Eigen::VectorXd trend(const MixtureParams& p) const {
    if (p.beta.empty()) return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(data_.n()));
    return data_.x * Eigen::Map<const Eigen::VectorXd>(p.beta.data(), static_cast<Eigen::Index>(p.beta.size()));
  }

  /// Starts from the emission-only argmax, then runs ICM scans in raster order.
  void icm(const MixtureParams& p) {
    const Eigen::VectorXd xb = trend(p);
    std::vector<double> h(static_cast<std::size_t>(n_colors_), 0.0);
    for (std::size_t i = 0; i < data_.n(); ++i) {
      labels_[data_.index[i]] = argmax_site(i, p, xb[static_cast<Eigen::Index>(i)], nullptr);
    }
    if (!kernel_) return;
    for (int cycle = 0; cycle < icm_cycles_; ++cycle) {
      for (std::size_t i = 0; i < data_.n(); ++i) {
        const std::size_t idx = data_.index[i];
        kernel_->compute(labels_, static_cast<int>(idx / data_.dims.cols), static_cast<int>(idx % data_.dims.cols), h);
        labels_[idx] = argmax_site(i, p, xb[static_cast<Eigen::Index>(i)], &h);
      }
    }
  }

  /// One E-step and M-step; returns the updated parameters.
  MixtureParams step(const MixtureParams& p) {
    const std::size_t n = data_.n();
    const auto nc = static_cast<std::size_t>(n_colors_);
    const Eigen::VectorXd xb = trend(p);
    Eigen::MatrixXd w(static_cast<Eigen::Index>(n), n_colors_);
    std::vector<double> h(nc, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t idx = data_.index[i];
      if (kernel_) {
        kernel_->compute(labels_, static_cast<int>(idx / data_.dims.cols), static_cast<int>(idx % data_.dims.cols), h);
      }
      const double resid = data_.y[i] - xb[static_cast<Eigen::Index>(i)];
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < nc; ++k) {
        h[k] += log_normal(resid, p.mu[k], p.sigma[k]);
        top = std::max(top, h[k]);
      }
      double total = 0.0;
      for (std::size_t k = 0; k < nc; ++k) total += (h[k] = std::exp(h[k] - top));
      for (std::size_t k = 0; k < nc; ++k) w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = h[k] / total;
      if (!kernel_) std::fill(h.begin(), h.end(), 0.0);
    }
    const Eigen::VectorXd mass = w.colwise().sum();
    for (std::size_t k = 0; k < nc; ++k) {
      if (!(mass[static_cast<Eigen::Index>(k)] > 1e-8)) {
        throw std::runtime_error("mixture component " + std::to_string(k) + " has no weight");
      }
    }

    // Joint weighted least squares for (mu, beta) with weights w_ik / sigma_k^2.
    const auto pb = data_.x.cols();
    const Eigen::Index dim = n_colors_ + pb;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
    const Eigen::Map<const Eigen::VectorXd> y(data_.y.data(), static_cast<Eigen::Index>(n));
    Eigen::VectorXd pixel_weight = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (Eigen::Index k = 0; k < n_colors_; ++k) {
      const double inv = 1.0 / (p.sigma[static_cast<std::size_t>(k)] * p.sigma[static_cast<std::size_t>(k)]);
      const Eigen::VectorXd wk = w.col(k) * inv;
      pixel_weight += wk;
      a(k, k) = wk.sum();
      rhs[k] = wk.dot(y);
      if (pb > 0) {
        const Eigen::RowVectorXd cross = wk.transpose() * data_.x;
        a.block(k, n_colors_, 1, pb) = cross;
        a.block(n_colors_, k, pb, 1) = cross.transpose();
      }
    }
    if (pb > 0) {
      a.bottomRightCorner(pb, pb) = data_.x.transpose() * pixel_weight.asDiagonal() * data_.x;
      rhs.tail(pb) = data_.x.transpose() * pixel_weight.cwiseProduct(y);
    }
    a.diagonal().array() += 1e-10 * std::max(1.0, a.diagonal().maxCoeff());
    const Eigen::VectorXd sol = a.ldlt().solve(rhs);

    MixtureParams out;
    out.mu.assign(sol.data(), sol.data() + n_colors_);
    out.beta.assign(sol.data() + n_colors_, sol.data() + dim);
    const Eigen::VectorXd resid = y - trend(out);
    out.sigma.assign(nc, 0.0);
    double pooled = 0.0;
    for (std::size_t k = 0; k < nc; ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      const double ss = w.col(kk).dot((resid.array() - out.mu[k]).square().matrix());
      pooled += ss;
      out.sigma[k] = std::sqrt(ss / mass[kk]);
    }
    if (equal_vars_) std::fill(out.sigma.begin(), out.sigma.end(), std::sqrt(pooled / static_cast<double>(n)));
    for (std::size_t k = 0; k < nc; ++k) {
      if (!(out.sigma[k] > 0)) throw std::runtime_error("mixture component " + std::to_string(k) + " collapsed");
    }
    return out;
  }

 private:
  int argmax_site(std::size_t i, const MixtureParams& p, double xb, const std::vector<double>* h) const {
    int best = 0;
    double best_v = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < n_colors_; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      const double v = (h ? (*h)[kk] : 0.0) + log_normal(data_.y[i] - xb, p.mu[kk], p.sigma[kk]);
      if (v > best_v) {  // strict: the lowest label wins ties
        best_v = v;
        best = k;
      }
    }
    return best;
  }

  const Data& data_;
  const PotentialArray* theta_;
  std::optional<LocalFieldKernel> kernel_;
  int n_colors_;
  bool equal_vars_;
  int icm_cycles_;
  std::vector<int> labels_;
};

bool close_enough(const MixtureParams& a, const MixtureParams& b, double tol) {
  for (std::size_t k = 0; k < a.mu.size(); ++k) {
    if (!(std::abs(a.mu[k] - b.mu[k]) < tol) || !(std::abs(a.sigma[k] - b.sigma[k]) < tol)) return false;
  }
  return true;
}

void check_params(const MixtureParams& p, int n_colors, std::size_t n_basis) {
  const auto nc = static_cast<std::size_t>(n_colors);
  if (p.mu.size() != nc || p.sigma.size() != nc) {
    throw std::invalid_argument("need " + std::to_string(nc) + " initial means and standard deviations");
  }
  for (double s : p.sigma) {
    if (!(s > 0) || !std::isfinite(s)) throw std::invalid_argument("standard deviations must be positive");
  }
  for (double m : p.mu) {
    if (!std::isfinite(m)) throw std::invalid_argument("means must be finite");
  }
  if (p.beta.size() != n_basis) throw std::invalid_argument("beta does not match the basis size");
}

}  // namespace

MixtureParams init_from_quantiles(const RealField& y, int max_label) {
  if (max_label < 1) throw std::invalid_argument("need C >= 1");
  const Data data = collect(y, std::nullopt);
  std::vector<double> sorted = data.y;
  std::sort(sorted.begin(), sorted.end());
  const auto distinct = static_cast<std::size_t>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
  if (distinct <= 1) throw std::invalid_argument("observed field is constant");
  if (distinct <= static_cast<std::size_t>(max_label) + 1) {
    throw std::invalid_argument("observed field needs more than C+1 distinct values");
  }
  sorted = data.y;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : sorted) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1));

  MixtureParams p;
  const int nc = max_label + 1;
  for (int k = 0; k < nc; ++k) {
    const double level = (2.0 * k + 1.0) / (2.0 * nc);
    const double hpos = (n - 1) * level;
    const auto lo = static_cast<std::size_t>(std::floor(hpos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    p.mu.push_back(sorted[lo] + (hpos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]));
    p.sigma.push_back(sd / nc);
  }
  Em em(data, nullptr, nc, false, 0);
  for (int it = 0; it < 100; ++it) {
    MixtureParams next = em.step(p);
    const bool done = close_enough(next, p, 1e-3);
    p = std::move(next);
    if (done) break;
  }
  return p;
}

HmrfFit fit_ghm(const RealField& y, const PotentialArray& theta, const std::optional<BasisSet>& basis,
                const GhmOptions& options) {
  if (options.maxiter < 0 || options.icm_cycles < 0) throw std::invalid_argument("iteration counts must be >= 0");
  if (!(options.max_dist > 0)) throw std::invalid_argument("max_dist must be positive");
  const int nc = theta.num_colors();
  const Data data = collect(y, basis);
  const std::size_t n_basis = basis ? basis->size() : 0;

  MixtureParams p;
  if (options.init_mus || options.init_sigmas) {
    if (!options.init_mus || !options.init_sigmas) {
      throw std::invalid_argument("initial means and standard deviations must be given together");
    }
    p.mu = *options.init_mus;
    p.sigma = *options.init_sigmas;
  } else {
    p = init_from_quantiles(y, theta.max_label());
  }
  p.beta.assign(n_basis, 0.0);
  check_params(p, nc, n_basis);
  if (options.equal_vars) {
    const double pooled = std::sqrt(std::accumulate(p.sigma.begin(), p.sigma.end(), 0.0,
                                                    [](double acc, double s) { return acc + s * s; }) /
                                    nc);
    std::fill(p.sigma.begin(), p.sigma.end(), pooled);
  }

  Em em(data, &theta, nc, options.equal_vars, options.icm_cycles);
  HmrfFit fit;
  for (int it = 0; it < options.maxiter; ++it) {
    em.icm(p);
    MixtureParams next = em.step(p);
    const bool done = close_enough(next, p, options.max_dist);
    p = std::move(next);
    fit.iterations = it + 1;
    if (done) {
      fit.converged = true;
      break;
    }
  }
  em.icm(p);

  // Sort components by mean and relabel.
  std::vector<int> order(static_cast<std::size_t>(nc));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return p.mu[static_cast<std::size_t>(a)] < p.mu[static_cast<std::size_t>(b)];
  });
  std::vector<int> rank(static_cast<std::size_t>(nc));
  MixtureParams sorted{{}, {}, p.beta};
  for (int k = 0; k < nc; ++k) {
    const auto src = static_cast<std::size_t>(order[static_cast<std::size_t>(k)]);
    rank[src] = k;
    sorted.mu.push_back(p.mu[src]);
    sorted.sigma.push_back(p.sigma[src]);
  }
  std::vector<int> labels = em.labels();
  for (auto& v : labels) {
    if (v >= 0) v = rank[static_cast<std::size_t>(v)];
  }
  const Eigen::VectorXd xb = em.trend(sorted);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> fixed(data.dims.size(), nan);
  std::vector<double> predicted(data.dims.size(), nan);
  for (std::size_t i = 0; i < data.n(); ++i) {
    const std::size_t idx = data.index[i];
    fixed[idx] = xb[static_cast<Eigen::Index>(i)];
    predicted[idx] = fixed[idx] + sorted.mu[static_cast<std::size_t>(labels[idx])];
  }
  fit.params = std::move(sorted);
  fit.z_pred = DiscreteField(data.dims, std::move(labels), theta.max_label());
  fit.counts = fit.z_pred.color_counts();
  fit.fixed = RealField(data.dims, std::move(fixed));
  fit.predicted = RealField(data.dims, std::move(predicted));
  fit.n_basis = n_basis;
  fit.structure = theta.structure();
  return fit;
}

}  // namespace pairmrf
