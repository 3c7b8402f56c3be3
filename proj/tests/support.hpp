#pragma once

// Test-only reference implementations, written independently of the library
// internals they check.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "pairmrf/field.hpp"
#include "pairmrf/interactions.hpp"
#include "pairmrf/potentials.hpp"

namespace testing {

using namespace pairmrf;

inline DiscreteField random_field(std::mt19937_64& gen, Dims dims, int max_label, double mask_rate = 0.0) {
  std::uniform_int_distribution<int> label(0, max_label);
  std::bernoulli_distribution masked(mask_rate);
  std::vector<int> labels(dims.size());
  for (auto& v : labels) v = masked(gen) ? DiscreteField::kMasked : label(gen);
  labels[0] = label(gen);  // keep at least one lattice pixel
  return DiscreteField(dims, std::move(labels), max_label);
}

inline std::vector<double> random_vector(std::mt19937_64& gen, std::size_t n, double lo = -2.0, double hi = 2.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(gen);
  return v;
}

inline PotentialArray random_theta(std::mt19937_64& gen, Family family, const InteractionStructure& s, int max_label,
                                   double lo = -2.0, double hi = 2.0) {
  return expand_array(random_vector(gen, free_dimension(family, s.size(), max_label), lo, hi), family, s, max_label);
}

/// H(z) as a literal double loop over pixels and positions.
inline double direct_energy(const DiscreteField& z, const PotentialArray& theta) {
  double h = 0.0;
  for (std::size_t k = 0; k < theta.n_positions(); ++k) {
    const Offset r = theta.structure()[k];
    for (int i = 0; i < z.rows(); ++i) {
      for (int j = 0; j < z.cols(); ++j) {
        const int i2 = i + r.row;
        const int j2 = j + r.col;
        if (i2 < 0 || j2 < 0 || i2 >= z.rows() || j2 >= z.cols()) continue;
        if (z.at(i, j) < 0 || z.at(i2, j2) < 0) continue;
        h += theta(k, z.at(i, j), z.at(i2, j2));
      }
    }
  }
  return h;
}

/// Integer count of pairs (i, i + r) with values (a, b).
inline std::int64_t direct_count(const DiscreteField& z, Offset r, int a, int b) {
  std::int64_t n = 0;
  for (int i = 0; i < z.rows(); ++i) {
    for (int j = 0; j < z.cols(); ++j) {
      const int i2 = i + r.row;
      const int j2 = j + r.col;
      if (i2 < 0 || j2 < 0 || i2 >= z.rows() || j2 >= z.cols()) continue;
      if (z.at(i, j) == a && z.at(i2, j2) == b) ++n;
    }
  }
  return n;
}

/// P(Z_i = k | rest) by evaluating the full energy for each k.
inline std::vector<double> brute_conditional(const DiscreteField& z, Pixel p, const PotentialArray& theta) {
  std::vector<int> labels(z.labels().begin(), z.labels().end());
  std::vector<double> e;
  for (int k = 0; k < theta.num_colors(); ++k) {
    labels[z.dims().index(p.row, p.col)] = k;
    e.push_back(direct_energy(DiscreteField(z.dims(), labels, theta.max_label()), theta));
  }
  double top = e[0];
  for (double v : e) top = std::max(top, v);
  double total = 0.0;
  for (auto& v : e) total += (v = std::exp(v - top));
  for (auto& v : e) v /= total;
  return e;
}

/// Canonical positions of a norm ball by scanning the bounding square.
inline std::vector<Offset> brute_ball(int n, NormType norm) {
  std::vector<Offset> out;
  for (int r = -n; r <= n; ++r) {
    for (int c = -n; c <= n; ++c) {
      if (r < 0 || (r == 0 && c <= 0)) continue;
      bool in = false;
      switch (norm) {
        case NormType::L1: in = std::abs(r) + std::abs(c) <= n; break;
        case NormType::L2: in = r * r + c * c <= n * n; break;
        case NormType::Linf: in = std::max(std::abs(r), std::abs(c)) <= n; break;
      }
      if (in) out.push_back({r, c});
    }
  }
  return out;
}

}  // namespace testing
