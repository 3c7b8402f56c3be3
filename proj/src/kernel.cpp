#include "pairmrf/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>

namespace pairmrf {

CooccurrenceHistogram::CooccurrenceHistogram(InteractionStructure structure, int max_label)
    : structure_(std::move(structure)), max_label_(max_label) {
  if (max_label < 0) throw std::invalid_argument("max label must be non-negative");
  const auto n = static_cast<std::size_t>(num_colors());
  counts_.assign(structure_.size() * n * n, 0);
}

std::int64_t CooccurrenceHistogram::slice_total(std::size_t k) const {
  const auto n = static_cast<std::size_t>(num_colors());
  const auto first = counts_.begin() + static_cast<std::ptrdiff_t>(k * n * n);
  return std::accumulate(first, first + static_cast<std::ptrdiff_t>(n * n), std::int64_t{0});
}

CooccurrenceHistogram cohist(const DiscreteField& z, const InteractionStructure& structure, int max_label) {
  if (max_label < 0) max_label = z.max_label();
  if (z.max_label() > max_label) {
    throw std::invalid_argument("field labels exceed C = " + std::to_string(max_label));
  }
  CooccurrenceHistogram hist(structure, max_label);
  const Dims d = z.dims();
  const auto labels = z.labels();
  for (std::size_t k = 0; k < structure.size(); ++k) {
    const Offset r = structure[k];
    const int row_lo = std::max(0, -r.row);
    const int row_hi = std::min(d.rows, d.rows - r.row);
    const int col_lo = std::max(0, -r.col);
    const int col_hi = std::min(d.cols, d.cols - r.col);
    for (int i1 = row_lo; i1 < row_hi; ++i1) {
      for (int i2 = col_lo; i2 < col_hi; ++i2) {
        const int a = labels[d.index(i1, i2)];
        const int b = labels[d.index(i1 + r.row, i2 + r.col)];
        if (a >= 0 && b >= 0) ++hist.at(k, a, b);
      }
    }
  }
  return hist;
}

std::vector<double> aggregate_statistics(const CooccurrenceHistogram& hist, Family family) {
  const ParameterMap map(family, hist.structure().size(), hist.max_label());
  std::vector<double> out(map.dimension(), 0.0);
  const auto counts = hist.counts();
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const int m = map.entries()[i];
    if (m >= 0) out[static_cast<std::size_t>(m)] += static_cast<double>(counts[i]);
  }
  return out;
}

std::vector<double> suff_stat(const DiscreteField& z, const InteractionStructure& structure, Family family,
                              int max_label) {
  return aggregate_statistics(cohist(z, structure, max_label), family);
}

namespace {

void check_compatible(const DiscreteField& z, const PotentialArray& theta) {
  if (z.max_label() > theta.max_label()) {
    throw std::invalid_argument("field uses label " + std::to_string(z.max_label()) +
                                " but potentials are defined for C = " + std::to_string(theta.max_label()));
  }
}

}  // namespace

double energy(const DiscreteField& z, const PotentialArray& theta) {
  check_compatible(z, theta);
  const auto hist = cohist(z, theta.structure(), theta.max_label());
  const auto counts = hist.counts();
  const auto values = theta.values();
  double h = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) h += values[i] * static_cast<double>(counts[i]);
  return h;
}

LocalFieldKernel::LocalFieldKernel(const PotentialArray& theta, Dims dims) : dims_(dims), n_(theta.num_colors()) {
  const auto n = static_cast<std::size_t>(n_);
  const std::size_t nk = theta.n_positions();
  steps_.reserve(nk);
  forward_.resize(nk * n * n);
  backward_.resize(nk * n * n);
  for (std::size_t k = 0; k < nk; ++k) {
    const Offset r = theta.structure()[k];
    steps_.push_back({r.row, r.col, static_cast<std::ptrdiff_t>(r.row) * dims.cols + r.col});
    for (int x = 0; x < n_; ++x) {
      for (int y = 0; y < n_; ++y) {
        forward_[(k * n + static_cast<std::size_t>(y)) * n + static_cast<std::size_t>(x)] = theta(k, x, y);
        backward_[(k * n + static_cast<std::size_t>(y)) * n + static_cast<std::size_t>(x)] = theta(k, y, x);
      }
    }
  }
}

void LocalFieldKernel::compute(std::span<const int> labels, int row, int col, std::span<double> h) const {
  const auto n = static_cast<std::size_t>(n_);
  std::fill(h.begin(), h.begin() + n_, 0.0);
  const std::size_t here = dims_.index(row, col);
  for (std::size_t k = 0; k < steps_.size(); ++k) {
    const Step& s = steps_[k];
    if (dims_.contains(row + s.dr, col + s.dc)) {
      const int lab = labels[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(here) + s.flat)];
      if (lab >= 0) {
        const double* src = &forward_[(k * n + static_cast<std::size_t>(lab)) * n];
        for (std::size_t x = 0; x < n; ++x) h[x] += src[x];
      }
    }
    if (dims_.contains(row - s.dr, col - s.dc)) {
      const int lab = labels[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(here) - s.flat)];
      if (lab >= 0) {
        const double* src = &backward_[(k * n + static_cast<std::size_t>(lab)) * n];
        for (std::size_t x = 0; x < n; ++x) h[x] += src[x];
      }
    }
  }
}

namespace {

void check_pixel(const DiscreteField& z, Pixel i) {
  if (!z.dims().contains(i.row, i.col)) {
    throw std::out_of_range("pixel (" + std::to_string(i.row) + "," + std::to_string(i.col) + ") is out of bounds");
  }
  if (!z.in_lattice(i.row, i.col)) {
    throw std::invalid_argument("pixel (" + std::to_string(i.row) + "," + std::to_string(i.col) +
                                ") is outside the lattice");
  }
}

}  // namespace

std::vector<double> local_field(const DiscreteField& z, Pixel i, const PotentialArray& theta) {
  check_compatible(z, theta);
  check_pixel(z, i);
  const LocalFieldKernel kernel(theta, z.dims());
  std::vector<double> h(static_cast<std::size_t>(theta.num_colors()));
  kernel.compute(z.labels(), i.row, i.col, h);
  return h;
}

double softmax_inplace(std::span<double> h) {
  const double top = *std::max_element(h.begin(), h.end());
  double total = 0.0;
  for (auto& v : h) {
    v = std::exp(v - top);
    total += v;
  }
  for (auto& v : h) v /= total;
  return top + std::log(total);
}

std::vector<double> conditional_probs(const DiscreteField& z, Pixel i, const PotentialArray& theta) {
  auto h = local_field(z, i, theta);
  softmax_inplace(h);
  return h;
}

PlValue evaluate_pl(const DiscreteField& z, const PotentialArray& theta, bool with_gradient, int threads) {
  check_compatible(z, theta);
  const LocalFieldKernel kernel(theta, z.dims());
  const ParameterMap map(theta.family(), theta.n_positions(), theta.max_label());
  const std::size_t dim = map.dimension();
  const int n = theta.num_colors();
  const Dims d = z.dims();
  const auto labels = z.labels();

  constexpr std::size_t kChunk = 4096;
  const std::size_t total = d.size();
  const std::size_t n_chunks = (total + kChunk - 1) / kChunk;
  std::vector<double> chunk_pl(n_chunks, 0.0);
  std::vector<double> chunk_grad(with_gradient ? n_chunks * dim : 0, 0.0);

  auto run_chunk = [&](std::size_t c) {
    std::vector<double> h(static_cast<std::size_t>(n));
    double acc = 0.0;
    double* grad = with_gradient ? &chunk_grad[c * dim] : nullptr;
    const std::size_t end = std::min(total, (c + 1) * kChunk);
    for (std::size_t idx = c * kChunk; idx < end; ++idx) {
      const int zi = labels[idx];
      if (zi < 0) continue;
      const int row = static_cast<int>(idx / static_cast<std::size_t>(d.cols));
      const int col = static_cast<int>(idx % static_cast<std::size_t>(d.cols));
      kernel.compute(labels, row, col, h);
      const double hz = h[static_cast<std::size_t>(zi)];
      const double lse = softmax_inplace(h);
      acc += hz - lse;
      if (grad == nullptr) continue;
      // d h_i(x) / d phi_m counts the neighbor terms mapped to m.
      kernel.for_each_neighbor(labels, row, col, [&](std::size_t k, int lab, bool forward) {
        for (int x = 0; x < n; ++x) {
          const int m = forward ? map(k, x, lab) : map(k, lab, x);
          if (m < 0) continue;
          grad[m] += (x == zi ? 1.0 : 0.0) - h[static_cast<std::size_t>(x)];
        }
      });
    }
    chunk_pl[c] = acc;
  };

  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(n_chunks)));
  if (workers == 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t c = static_cast<std::size_t>(w); c < n_chunks; c += static_cast<std::size_t>(workers)) {
          run_chunk(c);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  PlValue out;
  for (double v : chunk_pl) out.log_pl += v;
  if (with_gradient) {
    out.gradient.assign(dim, 0.0);
    for (std::size_t c = 0; c < n_chunks; ++c) {
      for (std::size_t m = 0; m < dim; ++m) out.gradient[m] += chunk_grad[c * dim + m];
    }
  }
  return out;
}

double pseudo_likelihood(const DiscreteField& z, const PotentialArray& theta, int threads) {
  return evaluate_pl(z, theta, false, threads).log_pl;
}

std::vector<double> pl_gradient(const DiscreteField& z, std::span<const double> theta_vec, Family family,
                                const InteractionStructure& structure, int max_label, int threads) {
  const auto theta = expand_array(theta_vec, family, structure, max_label);
  return evaluate_pl(z, theta, true, threads).gradient;
}

}  // namespace pairmrf
