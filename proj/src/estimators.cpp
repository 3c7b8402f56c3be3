#include "pairmrf/estimators.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pairmrf/kernel.hpp"
#include "pairmrf/sampler.hpp"

namespace pairmrf {

namespace {

void check_init(const std::optional<PotentialArray>& init, const InteractionStructure& structure, Family family,
                int max_label) {
  if (!init) return;
  if (init->family() != family) throw std::invalid_argument("initial potentials use a different family");
  if (!(init->structure() == structure)) throw std::invalid_argument("initial potentials use a different structure");
  if (init->max_label() != max_label) throw std::invalid_argument("initial potentials use a different C");
}

std::vector<double> initial_vector(const std::optional<PotentialArray>& init, Family family,
                                   const InteractionStructure& structure, int max_label) {
  if (init) return summarize_array(*init);
  return std::vector<double>(free_dimension(family, structure.size(), max_label), 0.0);
}

using Vec = Eigen::VectorXd;

/// Negative log PL and its gradient, for minimization.
struct PlObjective {
  const DiscreteField& z;
  const InteractionStructure& structure;
  Family family;
  int max_label;
  int threads;
  int evaluations = 0;

  double operator()(const Vec& x, Vec& grad) {
    ++evaluations;
    const auto theta = expand_array(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())), family,
                                    structure, max_label);
    const PlValue v = evaluate_pl(z, theta, true, threads);
    grad = -Eigen::Map<const Vec>(v.gradient.data(), static_cast<Eigen::Index>(v.gradient.size()));
    return -v.log_pl;
  }
};

struct LineResult {
  bool ok = false;
  double alpha = 0.0;
  double f = 0.0;
  Vec x;
  Vec g;
};

/// Strong-Wolfe search along p. Brackets the minimizer using the sign of the
/// directional derivative, which stays accurate near the optimum where
/// differences of the large objective value are lost to rounding.
LineResult wolfe_search(PlObjective& obj, const Vec& x0, double f0, const Vec& g0, const Vec& p, double alpha) {
  constexpr double c1 = 1e-4;
  constexpr double c2 = 0.9;
  const double d0 = g0.dot(p);
  const double slack = 1e-12 * (1.0 + std::abs(f0));
  double lo = 0.0;
  double d_lo = d0;
  double hi = std::numeric_limits<double>::infinity();
  double d_hi = 0.0;
  LineResult best;
  for (int it = 0; it < 60; ++it) {
    LineResult cur;
    cur.alpha = alpha;
    cur.x = x0 + alpha * p;
    cur.f = obj(cur.x, cur.g);
    const double d = cur.g.dot(p);
    if (!std::isfinite(cur.f) || cur.f > f0 + c1 * alpha * d0 + slack) {
      hi = alpha;
      d_hi = std::isfinite(d) ? d : std::numeric_limits<double>::infinity();
    } else {
      if (!best.ok || cur.f <= best.f) {
        best = cur;
        best.ok = true;
      }
      if (std::abs(d) <= c2 * std::abs(d0)) {
        cur.ok = true;
        return cur;
      }
      if (d > 0) {
        hi = alpha;
        d_hi = d;
      } else {
        lo = alpha;
        d_lo = d;
      }
    }
    if (std::isinf(hi)) {
      alpha *= 2.0;
    } else {
      // Secant on the directional derivative, kept inside the bracket.
      double next = 0.5 * (lo + hi);
      if (std::isfinite(d_hi) && d_hi > d_lo) next = lo - d_lo * (hi - lo) / (d_hi - d_lo);
      const double margin = 0.1 * (hi - lo);
      alpha = std::clamp(next, lo + margin, hi - margin);
      if (hi - lo <= 1e-16 * std::max(1.0, hi)) break;
    }
  }
  // Accept a sufficient-decrease point even if curvature was not met.
  return best;
}

}  // namespace

MrfFit fit_pl(const DiscreteField& z, const InteractionStructure& structure, Family family, const PlOptions& options,
              const std::optional<PotentialArray>& init) {
  if (structure.empty()) throw std::invalid_argument("interaction structure is empty");
  if (z.distinct_labels() < 2) {
    throw std::invalid_argument("no contrast: the field has a single color, so the pseudo-likelihood is flat");
  }
  if (options.gtol <= 0) throw std::invalid_argument("gtol must be positive");
  const int max_label = z.max_label();
  check_init(init, structure, family, max_label);
  const auto start = initial_vector(init, family, structure, max_label);

  PlObjective obj{z, structure, family, max_label, options.threads};
  const auto n = static_cast<Eigen::Index>(start.size());
  Vec x = Eigen::Map<const Vec>(start.data(), n);
  Vec g;
  double f = obj(x, g);
  Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(n, n);
  bool scaled = false;

  auto make_fit = [&](int iterations) {
    MrfFit fit;
    fit.theta = expand_array(std::span<const double>(x.data(), static_cast<std::size_t>(n)), family, structure,
                             max_label);
    fit.method = FitMethod::PseudoLikelihood;
    fit.log_pl = -f;
    fit.color_counts = z.color_counts();
    fit.dims = z.dims();
    fit.iterations = iterations;
    fit.gradient_norm = g.lpNorm<Eigen::Infinity>();
    return fit;
  };

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    if (!std::isfinite(f)) throw ConvergenceError("pseudo-likelihood became non-finite", make_fit(iter));
    if (g.lpNorm<Eigen::Infinity>() <= options.gtol) return make_fit(iter);
    Vec p = -hinv * g;
    if (g.dot(p) >= 0) {
      hinv.setIdentity();
      scaled = false;
      p = -g;
    }
    const double alpha0 = scaled ? 1.0 : 1.0 / std::max(1.0, p.norm());
    LineResult step = wolfe_search(obj, x, f, g, p, alpha0);
    if (!step.ok) {
      if (scaled) {
        // Retry once from steepest descent before giving up.
        hinv.setIdentity();
        scaled = false;
        continue;
      }
      throw ConvergenceError("line search failed to make progress", make_fit(iter));
    }
    const Vec s = step.x - x;
    const Vec y = step.g - g;
    x = step.x;
    g = step.g;
    f = step.f;
    const double sy = s.dot(y);
    if (sy > 1e-300) {
      if (!scaled) {
        hinv *= sy / y.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Vec hy = hinv * y;
      const double yhy = y.dot(hy);
      hinv += ((1.0 + rho * yhy) * rho) * (s * s.transpose()) - rho * (hy * s.transpose() + s * hy.transpose());
    }
  }
  if (g.lpNorm<Eigen::Infinity>() <= options.gtol) return make_fit(options.max_iterations);
  throw ConvergenceError("pseudo-likelihood optimizer did not converge in " + std::to_string(options.max_iterations) +
                             " iterations",
                         make_fit(options.max_iterations));
}

std::vector<double> linear_sequence(double from, double to, int length) {
  if (length < 0) throw std::invalid_argument("sequence length must be non-negative");
  std::vector<double> out(static_cast<std::size_t>(length));
  if (length == 1) {
    out[0] = from;
    return out;
  }
  for (int t = 0; t < length; ++t) out[static_cast<std::size_t>(t)] = from + (to - from) * t / (length - 1);
  return out;
}

MrfFit fit_sa(const DiscreteField& z, const InteractionStructure& structure, Family family, const SaOptions& options,
              const std::optional<PotentialArray>& init) {
  if (structure.empty()) throw std::invalid_argument("interaction structure is empty");
  if (options.gamma_seq.empty()) throw std::invalid_argument("gamma sequence is empty");
  for (double gamma : options.gamma_seq) {
    if (!(gamma >= 0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma values must be finite and >= 0");
  }
  if (options.cycles < 0 || options.refresh_cycles < 0 || options.refresh_each < 0) {
    throw std::invalid_argument("cycle counts must be non-negative");
  }
  const int max_label = z.max_label();
  if (max_label < 1) throw std::invalid_argument("the field needs C >= 1");
  check_init(init, structure, family, max_label);

  std::vector<double> vec = initial_vector(init, family, structure, max_label);
  const std::vector<double> s0 = suff_stat(z, structure, family, max_label);
  const double n_lattice = static_cast<double>(z.lattice_size());

  Rng rng(options.seed);
  GibbsChain chain(z, expand_array(vec, family, structure, max_label));
  chain.track_histogram();

  MrfFit fit;
  fit.method = FitMethod::StochasticApproximation;
  fit.color_counts = z.color_counts();
  fit.dims = z.dims();
  const int steps = static_cast<int>(options.gamma_seq.size());
  fit.metrics.reserve(options.gamma_seq.size());
  for (int t = 0; t < steps; ++t) {
    chain.set_theta(expand_array(vec, family, structure, max_label));
    if (options.refresh_each > 0 && (t + 1) % options.refresh_each == 0) {
      chain.randomize(rng);
      chain.run(options.refresh_cycles, rng);
    } else {
      chain.run(options.cycles, rng);
    }
    const std::vector<double> st = aggregate_statistics(chain.histogram(), family);
    const double step = options.gamma_seq[static_cast<std::size_t>(t)] / n_lattice;
    double dist2 = 0.0;
    for (std::size_t m = 0; m < vec.size(); ++m) {
      const double diff = s0[m] - st[m];
      dist2 += diff * diff;
      vec[m] += step * diff;
    }
    fit.metrics.push_back({t + 1, std::sqrt(dist2)});
  }
  fit.theta = expand_array(vec, family, structure, max_label);
  fit.iterations = steps;
  return fit;
}

std::vector<double> position_strength(const PotentialArray& theta) {
  const ParameterMap map(theta.family(), theta.n_positions(), theta.max_label());
  const auto vec = summarize_array(theta);
  std::vector<double> out(theta.n_positions(), 0.0);
  for (std::size_t m = 0; m < vec.size(); ++m) {
    const auto owner = map.owner(m);
    if (owner) {
      out[*owner] = std::max(out[*owner], std::abs(vec[m]));
    } else {
      for (auto& v : out) v = std::max(v, std::abs(vec[m]));
    }
  }
  return out;
}

Selection select_interactions(const DiscreteField& z, const InteractionStructure& candidates, Family family,
                              const SaOptions& options, double threshold) {
  if (!(threshold >= 0)) throw std::invalid_argument("threshold must be non-negative");
  Selection sel{InteractionStructure(), fit_sa(z, candidates, family, options), {}};
  sel.strength = position_strength(sel.fit.theta);
  std::vector<Offset> kept;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (sel.strength[k] > threshold) kept.push_back(candidates[k]);
  }
  if (kept.empty()) throw std::runtime_error("no interactions survive the threshold");
  sel.structure = InteractionStructure(std::move(kept));
  return sel;
}

}  // namespace pairmrf
