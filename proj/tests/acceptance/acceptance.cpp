// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "pairmrf/estimators.hpp"
#include "pairmrf/exact.hpp"
#include "pairmrf/hmrf.hpp"
#include "pairmrf/kernel.hpp"
#include "pairmrf/sampler.hpp"

using namespace pairmrf;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

PotentialArray potts(double phi, const InteractionStructure& s, int max_label = 1) {
  return expand_array(std::vector<double>{phi}, Family::OnePar, s, max_label);
}

std::vector<double> uniform_vector(std::mt19937_64& gen, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(gen);
  return v;
}

DiscreteField random_field(std::mt19937_64& gen, Dims d, int max_label, double mask_rate) {
  std::uniform_int_distribution<int> label(0, max_label);
  std::bernoulli_distribution masked(mask_rate);
  std::vector<int> v(d.size());
  for (auto& x : v) x = masked(gen) ? DiscreteField::kMasked : label(gen);
  v[0] = label(gen);
  return DiscreteField(d, std::move(v), max_label);
}

std::string fmt(const char* pattern, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

// 1 --------------------------------------------------------------------------

Outcome conditional_exactness() {
  std::mt19937_64 gen(101);
  const auto s = build_structure(1, NormType::L1);
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const auto theta = expand_array(uniform_vector(gen, free_dimension(Family::Free, s.size(), 1), -2, 2),
                                    Family::Free, s, 1);
    const auto z = random_field(gen, Dims{3, 3}, 1, 0.0);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const auto a = conditional_probs(z, {i, j}, theta);
        const auto b = exact_conditional(z, {i, j}, theta);
        for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
      }
    }
  }
  return {worst < 1e-12, fmt("max abs error %.2e", worst)};
}

// 2 --------------------------------------------------------------------------

Outcome energy_identity() {
  std::mt19937_64 gen(102);
  const Family families[] = {Family::OnePar, Family::OneEach, Family::AbsDif, Family::Dif, Family::Free};
  double worst = 0.0;
  int count_mismatch = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const Family f = families[rep % 5];
    const int max_label = 1 + rep % 3;
    const Dims d{2 + rep % 5, 3 + (rep / 5) % 4};
    const auto s = build_structure(1 + rep % 3, rep % 2 ? NormType::Linf : NormType::L1);
    const auto z = random_field(gen, d, max_label, rep % 4 == 0 ? 0.2 : 0.0);
    const auto vec = uniform_vector(gen, free_dimension(f, s.size(), max_label), -2, 2);
    const auto theta = expand_array(vec, f, s, max_label);
    const auto stat = suff_stat(z, s, f, max_label);
    const double dot = std::inner_product(stat.begin(), stat.end(), vec.begin(), 0.0);
    const double h = energy(z, theta);
    worst = std::max(worst, std::abs(h - dot));

    // Integer counts against a literal pair loop.
    const auto hist = cohist(z, s, max_label);
    std::vector<std::int64_t> direct(hist.counts().size(), 0);
    double loop_energy = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
      for (int i = 0; i < d.rows; ++i) {
        for (int j = 0; j < d.cols; ++j) {
          const int i2 = i + s[k].row;
          const int j2 = j + s[k].col;
          if (!d.contains(i2, j2) || z.at(i, j) < 0 || z.at(i2, j2) < 0) continue;
          const int a = z.at(i, j);
          const int b = z.at(i2, j2);
          ++direct[(k * (max_label + 1) + a) * (max_label + 1) + b];
          loop_energy += theta(k, a, b);
        }
      }
    }
    if (!std::equal(direct.begin(), direct.end(), hist.counts().begin())) ++count_mismatch;
    worst = std::max(worst, std::abs(h - loop_energy));
  }
  return {worst < 1e-10 && count_mismatch == 0,
          fmt("max |H - <S,theta>| %.2e, histogram mismatches %.0f", worst, count_mismatch)};
}

// 3 --------------------------------------------------------------------------

Outcome sampler_correctness() {
  const auto s = build_structure(1, NormType::L1);
  const auto theta = potts(-0.8, s);
  // oneeach splits the Potts statistic by position: two components to check.
  const Family f = Family::OneEach;
  const auto exact = exact_expected_stats(Dims{4, 4}, expand_array(std::vector<double>{-0.8, -0.8}, f, s, 1));

  Rng rng(103);
  std::vector<int> start(16);
  for (auto& v : start) v = static_cast<int>(rng.below(2));
  GibbsChain chain(DiscreteField(Dims{4, 4}, start, 1), theta);
  chain.track_histogram();
  chain.run(1000, rng);

  const int cycles = 200000;
  const int batch = 1000;
  const std::size_t dim = exact.size();
  std::vector<double> sum(dim, 0.0);
  std::vector<double> batch_sum(dim, 0.0);
  std::vector<std::vector<double>> batch_means(dim);
  for (int t = 0; t < cycles; ++t) {
    chain.run(1, rng);
    const auto st = aggregate_statistics(chain.histogram(), f);
    for (std::size_t m = 0; m < dim; ++m) {
      sum[m] += st[m];
      batch_sum[m] += st[m];
    }
    if ((t + 1) % batch == 0) {
      for (std::size_t m = 0; m < dim; ++m) {
        batch_means[m].push_back(batch_sum[m] / batch);
        batch_sum[m] = 0.0;
      }
    }
  }
  double worst = 0.0;
  for (std::size_t m = 0; m < dim; ++m) {
    const double mean = sum[m] / cycles;
    const auto& bm = batch_means[m];
    const double bmean = std::accumulate(bm.begin(), bm.end(), 0.0) / static_cast<double>(bm.size());
    double ss = 0.0;
    for (double v : bm) ss += (v - bmean) * (v - bmean);
    const double se = std::sqrt(ss / static_cast<double>(bm.size() - 1) / static_cast<double>(bm.size()));
    worst = std::max(worst, std::abs(mean - exact[m]) / se);
  }
  return {worst < 3.0, fmt("max |mean - exact| / SE = %.2f (batch means, 200 batches)", worst)};
}

// 4 --------------------------------------------------------------------------

Outcome independence() {
  const auto s = build_structure(1, NormType::L1);
  const auto theta = potts(0.0, s, 2);
  SamplerConfig cfg;
  cfg.cycles = 5;
  cfg.seed = 104;
  const auto z = sample_mrf(Dims{200, 200}, theta, cfg);
  const double n = 40000.0;
  double worst = 0.0;
  for (auto c : z.color_counts()) {
    const double sd = std::sqrt(n * (1.0 / 3) * (2.0 / 3));
    worst = std::max(worst, std::abs(static_cast<double>(c) - n / 3) / sd);
  }
  // Differing-pair indicators of i.i.d. uniform labels are pairwise
  // independent, so the off-diagonal count is exactly binomial.
  const auto hist = cohist(z, s, 2);
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double pairs = static_cast<double>(hist.slice_total(k));
    double off = 0.0;
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        if (a != b) off += static_cast<double>(hist(k, a, b));
      }
    }
    const double sd = std::sqrt(pairs * (2.0 / 3) * (1.0 / 3));
    worst = std::max(worst, std::abs(off - pairs * 2.0 / 3) / sd);
  }
  return {worst < 4.0, fmt("max deviation %.2f sigma", worst)};
}

// 5 and 7 --------------------------------------------------------------------

const InteractionStructure& texture_structure() {
  static const InteractionStructure s({{1, 0}, {0, 1}, {4, 4}});
  return s;
}

DiscreteField texture_field(std::uint64_t seed) {
  const auto theta = expand_array(std::vector<double>{-1.0, -1.0, 0.2}, Family::OneEach, texture_structure(), 1);
  SamplerConfig cfg;
  cfg.cycles = 60;
  cfg.seed = seed;
  return sample_mrf(Dims{150, 150}, theta, cfg);
}

Outcome mple_recovery() {
  const std::vector<double> truth{-1.0, -1.0, 0.2};
  int hits = 0;
  double slowest = 0.0;
  std::ostringstream detail;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto start = std::chrono::steady_clock::now();
    const auto z = texture_field(derive_seed(105, seed));
    const auto fit = fit_pl(z, texture_structure(), Family::OneEach);
    slowest = std::max(slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    const auto est = summarize_array(fit.theta);
    bool ok = true;
    for (std::size_t m = 0; m < 3; ++m) ok = ok && std::abs(est[m] - truth[m]) <= 0.12;
    hits += ok;
  }
  detail << hits << "/10 seeds within 0.12, slowest seed " << fmt("%.2f s", slowest);
  return {hits >= 9 && slowest < 120.0, detail.str()};
}

Outcome selection() {
  const auto candidates = build_structure(6, NormType::Linf);
  int hits = 0;
  std::ostringstream misses;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto z = texture_field(derive_seed(107, seed));
    SaOptions o;
    o.seed = derive_seed(1070, seed);
    try {
      const auto sel = select_interactions(z, candidates, Family::OneEach, o, 0.1);
      if (sel.structure.equivalent(texture_structure())) {
        ++hits;
      } else {
        misses << " seed" << seed << ":";
        for (auto r : sel.structure.positions()) misses << to_string(r);
      }
    } catch (const std::exception& e) {
      misses << " seed" << seed << ":error";
    }
  }
  std::ostringstream detail;
  detail << candidates.size() << " candidates, " << hits << "/10 seeds exact;" << misses.str();
  return {candidates.size() == 84 && hits >= 8, detail.str()};
}

// 6 --------------------------------------------------------------------------

Outcome sa_vs_exact() {
  const auto s = build_structure(1, NormType::L1);
  const Dims d{4, 4};
  const ExactModel data_model(d, potts(-0.8, s));
  const auto probs = data_model.probabilities();
  int hits = 0;
  int decreasing = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    // Exact draws; configurations on the boundary of the statistic's range
    // have no finite MLE and are redrawn.
    std::mt19937_64 gen(derive_seed(106, seed));
    std::discrete_distribution<std::uint64_t> pick(probs.begin(), probs.end());
    DiscreteField z;
    std::vector<double> mle;
    for (;;) {
      z = DiscreteField(d, data_model.decode(pick(gen)), 1);
      try {
        mle = exact_mle(z, s, Family::OnePar);
        break;
      } catch (const BoundaryError&) {
      }
    }
    SaOptions o;
    o.gamma_seq = linear_sequence(1.0, 0.0, 2000);
    o.cycles = 1;
    o.seed = derive_seed(1060, seed);
    const auto fit = fit_sa(z, s, Family::OnePar, o);
    const double err = std::abs(summarize_array(fit.theta)[0] - mle[0]);
    worst = std::max(worst, err);
    hits += err <= 0.15;
    decreasing += fit.metrics.back().distance < fit.metrics.front().distance;
  }
  std::ostringstream detail;
  detail << hits << "/10 within 0.15 (max error " << fmt("%.3f", worst) << "), final distance below initial in "
         << decreasing << "/10";
  return {hits >= 8 && decreasing == 10, detail.str()};
}

// 8 --------------------------------------------------------------------------

Outcome hmrf_recovery() {
  const auto s = build_structure(1, NormType::L1);
  const auto theta = potts(-1.0, s);
  SamplerConfig cfg;
  cfg.seed = 108;
  const Dims d{120, 120};
  const auto z = sample_mrf(d, theta, cfg);

  std::mt19937_64 gen(1080);
  std::normal_distribution<double> n01;
  std::vector<double> noise(d.size());
  for (auto& v : noise) v = n01(gen);

  const auto trend_basis = polynomial_basis(2, 2, d);
  const std::vector<double> trend_coef{0.8, -0.6, 0.5, 0.4, -0.3, 0.25, 0.2, -0.15};
  std::vector<double> trend(d.size(), 0.0);
  for (std::size_t j = 0; j < trend_basis.size(); ++j) {
    for (std::size_t i = 0; i < d.size(); ++i) trend[i] += trend_coef[j] * trend_basis(j, i);
  }
  const std::vector<double> mu{0.0, 3.0};
  std::vector<double> plain(d.size());
  std::vector<double> shifted(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    plain[i] = mu[static_cast<std::size_t>(z[i])] + noise[i];
    shifted[i] = plain[i] + trend[i];
  }

  auto accuracy = [&](const DiscreteField& pred) {
    std::size_t same = 0;
    for (std::size_t i = 0; i < d.size(); ++i) same += pred[i] == z[i];
    const double a = static_cast<double>(same) / static_cast<double>(d.size());
    return std::max(a, 1.0 - a);
  };

  const auto fit = fit_ghm(RealField(d, plain), theta);
  const double acc = accuracy(fit.z_pred);
  double param_err = 0.0;
  for (int k = 0; k < 2; ++k) {
    param_err = std::max(param_err, std::abs(fit.params.mu[k] - mu[k]));
    param_err = std::max(param_err, std::abs(fit.params.sigma[k] - 1.0));
  }

  const auto trended = fit_ghm(RealField(d, shifted), theta, polynomial_basis(3, 3, d));
  const double acc_trend = accuracy(trended.z_pred);
  double sq = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) sq += std::pow(trended.fixed[i] - trend[i], 2);
  const double rmse = std::sqrt(sq / static_cast<double>(d.size()));

  GhmOptions eq;
  eq.equal_vars = true;
  const auto pooled = fit_ghm(RealField(d, plain), theta, std::nullopt, eq);
  const bool equal = pooled.params.sigma[0] == pooled.params.sigma[1];

  std::ostringstream detail;
  detail << "accuracy " << fmt("%.4f", acc) << ", max |param error| " << fmt("%.3f", param_err)
         << "; with trend accuracy " << fmt("%.4f", acc_trend) << ", trend RMSE " << fmt("%.4f", rmse)
         << "; equal_vars sigmas " << (equal ? "identical" : "differ");
  return {acc >= 0.95 && param_err <= 0.1 && acc_trend >= 0.93 && rmse < 0.15 && equal, detail.str()};
}

// 9 --------------------------------------------------------------------------

bool well_formed(const InteractionStructure& s) {
  for (std::size_t a = 0; a < s.size(); ++a) {
    if (s[a].is_origin()) return false;
    for (std::size_t b = a + 1; b < s.size(); ++b) {
      if (s[a] == s[b] || s[a] == -s[b]) return false;
    }
  }
  return true;
}

std::set<std::pair<int, int>> classes(const InteractionStructure& s) {
  std::set<std::pair<int, int>> out;
  for (auto r : s.positions()) {
    const Offset c = (r.row > 0 || (r.row == 0 && r.col > 0)) ? r : -r;
    out.insert({c.row, c.col});
  }
  return out;
}

Outcome structure_algebra() {
  std::mt19937_64 gen(109);
  std::uniform_int_distribution<int> coord(-4, 4);
  auto random_structure = [&] {
    std::vector<Offset> v;
    const int n = std::uniform_int_distribution<int>(1, 8)(gen);
    while (static_cast<int>(v.size()) < n) {
      const Offset r{coord(gen), coord(gen)};
      if (r.is_origin()) continue;
      if (std::any_of(v.begin(), v.end(), [&](Offset q) { return q == r || q == -r; })) continue;
      v.push_back(r);
    }
    return InteractionStructure(v);
  };
  int violations = 0;
  for (int op = 0; op < 1000; ++op) {
    const auto a = random_structure();
    const auto b = random_structure();
    const auto ca = classes(a);
    const auto cb = classes(b);
    InteractionStructure out;
    std::set<std::pair<int, int>> expect;
    switch (op % 3) {
      case 0:
        out = a + b;
        expect = ca;
        expect.insert(cb.begin(), cb.end());
        break;
      case 1:
        out = a - b;
        for (const auto& c : ca) {
          if (!cb.count(c)) expect.insert(c);
        }
        break;
      default: {
        std::vector<std::size_t> idx(a.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), gen);
        idx.resize(std::uniform_int_distribution<std::size_t>(0, a.size())(gen));
        out = subset(a, idx);
        for (std::size_t i : idx) expect.insert(*classes(InteractionStructure({a[i]})).begin());
        break;
      }
    }
    if (!well_formed(out) || classes(out) != expect) ++violations;
  }
  int size_errors = 0;
  for (int n = 0; n <= 8; ++n) size_errors += build_structure(n, NormType::Linf).size() != 2u * n * (n + 1);
  const auto n6 = build_structure(6, NormType::Linf).size();
  std::ostringstream detail;
  detail << "1000 ops, " << violations << " invariant violations; size formula errors " << size_errors
         << "; |Linf 6| = " << n6;
  return {violations == 0 && size_errors == 0 && n6 == 84, detail.str()};
}

// 10 -------------------------------------------------------------------------

Outcome round_trips() {
  std::mt19937_64 gen(110);
  int failures = 0;
  int total = 0;
  for (Family f : {Family::OnePar, Family::OneEach, Family::AbsDif, Family::Dif, Family::Free}) {
    for (int c = 1; c <= 3; ++c) {
      for (std::size_t n : {1u, 2u, 5u}) {
        std::vector<std::size_t> first(n);
        std::iota(first.begin(), first.end(), 0);
        const auto s = subset(build_structure(2, NormType::L1), first);
        for (int rep = 0; rep < 100; ++rep) {
          const auto v = uniform_vector(gen, free_dimension(f, n, c), -3, 3);
          failures += summarize_array(expand_array(v, f, s, c)) != v;
          ++total;
        }
      }
    }
  }
  std::ostringstream detail;
  detail << total << " round trips, " << failures << " inexact";
  return {failures == 0, detail.str()};
}

// 11 -------------------------------------------------------------------------

Outcome pl_gradient_check() {
  std::mt19937_64 gen(111);
  const Family families[] = {Family::OnePar, Family::OneEach, Family::AbsDif, Family::Dif, Family::Free};
  double worst = 0.0;
  const double h = 1e-5;
  for (int rep = 0; rep < 50; ++rep) {
    const Family f = families[rep % 5];
    const int c = 1 + rep % 2;
    const auto s = build_structure(rep % 2 ? 1.5 : 1.0, NormType::L2);
    const auto z = random_field(gen, Dims{5, 6}, c, rep % 3 == 0 ? 0.15 : 0.0);
    auto v = uniform_vector(gen, free_dimension(f, s.size(), c), -1, 1);
    const auto g = pl_gradient(z, v, f, s, c);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t m = 0; m < v.size(); ++m) {
      const double keep = v[m];
      v[m] = keep + h;
      const double up = pseudo_likelihood(z, expand_array(v, f, s, c));
      v[m] = keep - h;
      const double down = pseudo_likelihood(z, expand_array(v, f, s, c));
      v[m] = keep;
      const double fd = (up - down) / (2 * h);
      num += (g[m] - fd) * (g[m] - fd);
      den += g[m] * g[m];
    }
    worst = std::max(worst, std::sqrt(num) / std::max(std::sqrt(den), 1e-8));
  }
  return {worst < 1e-6, fmt("max relative error %.2e", worst)};
}

// 12 -------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "pairmrf-acceptance-replay";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string field = (dir / "z.txt").string();
  const std::vector<std::vector<std::string>> commands{
      {"sample", "--dims", "60,60", "--mrfi", "norm:L1:1", "--theta", "oneeach:-1,-1", "--out", field},
      {"fit-sa", "--z", field, "--mrfi", "norm:L1:1", "--family", "oneeach", "--gamma", "1:0:100", "--out",
       (dir / "sa.spec").string()},
      {"select", "--z", field, "--mrfi", "norm:Linf:2", "--family", "oneeach", "--threshold", "0.1", "--out",
       (dir / "sel.txt").string()},
      {"demo", "texture", "--out-dir", (dir / "texture").string()},
      {"demo", "hmrf", "--out-dir", (dir / "hmrf").string()},
      {"demo", "segmentation", "--out-dir", (dir / "segmentation").string()},
  };
  const std::vector<fs::path> manifests{dir / "z.txt.manifest",       dir / "sa.spec.manifest",
                                        dir / "sel.txt.manifest",     dir / "texture" / "manifest.txt",
                                        dir / "hmrf" / "manifest.txt", dir / "segmentation" / "manifest.txt"};
  std::ostringstream sink;
  std::ostringstream detail;
  int checked = 0;
  int failures = 0;
  for (std::size_t c = 0; c < commands.size(); ++c) {
    if (cli::run(commands[c], sink, sink) != cli::kOk || !fs::exists(manifests[c])) {
      ++failures;
      detail << ' ' << commands[c][0] << ":run-failed";
      continue;
    }
    const auto m = cli::read_manifest(manifests[c]);
    std::map<std::string, std::string> before;
    for (const auto& out : m.outputs) {
      before[out] = slurp(out);
      fs::remove(out);
    }
    // Replaying re-runs the recorded arguments, including the drawn seed.
    const fs::path copy = dir / ("replay-" + std::to_string(c) + ".manifest");
    fs::copy_file(manifests[c], copy, fs::copy_options::overwrite_existing);
    if (cli::run({"replay", copy.string()}, sink, sink) != cli::kOk) {
      ++failures;
      detail << ' ' << commands[c][0] << ":replay-failed";
      continue;
    }
    for (const auto& [path, bytes] : before) {
      ++checked;
      if (!fs::exists(path) || slurp(path) != bytes) {
        ++failures;
        detail << ' ' << fs::path(path).filename().string() << ":differs";
      }
    }
  }
  std::ostringstream head;
  head << commands.size() << " commands, " << checked << " outputs compared, " << failures << " mismatches"
       << detail.str();
  return {failures == 0 && checked > 0, head.str()};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "conditional exactness", 5, conditional_exactness},
      {2, "energy/statistics identity", 10, energy_identity},
      {3, "sampler correctness", 60, sampler_correctness},
      {4, "independence sanity", 10, independence},
      {5, "MPLE recovery", 1200, mple_recovery},
      {6, "SA vs exact MLE", 60, sa_vs_exact},
      {7, "interaction selection", 600, selection},
      {8, "HMRF recovery", 180, hmrf_recovery},
      {9, "structure algebra", 2, structure_algebra},
      {10, "conversion round trips", 2, round_trips},
      {11, "PL gradient", 10, pl_gradient_check},
      {12, "determinism", 1e9, determinism},
  };
  std::set<int> only;
  for (int a = 1; a < argc; ++a) only.insert(std::atoi(argv[a]));

  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = secs < c.budget_seconds;
    const bool pass = o.pass && in_budget;
    failed += !pass;
    std::printf("%s criterion %2d %-28s %s [%.2f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                secs, in_budget ? "" : ", over budget");
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
