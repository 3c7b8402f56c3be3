#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "pairmrf/kernel.hpp"
#include "support.hpp"

using namespace pairmrf;

namespace {
const Family kFamilies[] = {Family::OnePar, Family::OneEach, Family::AbsDif, Family::Dif, Family::Free};
}

TEST_CASE("cohist counts match a direct pair loop") {
  std::mt19937_64 gen(5);
  const auto s = build_structure(2, NormType::L2, std::vector<Offset>{{3, -2}});
  for (int rep = 0; rep < 20; ++rep) {
    const auto z = testing::random_field(gen, Dims{7, 9}, 2, 0.2);
    const auto hist = cohist(z, s);
    for (std::size_t k = 0; k < s.size(); ++k) {
      for (int a = 0; a <= 2; ++a) {
        for (int b = 0; b <= 2; ++b) CHECK(hist(k, a, b) == testing::direct_count(z, s[k], a, b));
      }
    }
  }
}

TEST_CASE("known counts on a 2x2 checkerboard") {
  const DiscreteField z(Dims{2, 2}, {0, 1, 1, 0});
  const auto hist = cohist(z, build_structure(1, NormType::L1));
  CHECK(hist(0, 0, 1) == 1);
  CHECK(hist(0, 1, 0) == 1);
  CHECK(hist(0, 0, 0) == 0);
  CHECK(hist.slice_total(1) == 2);
  CHECK(suff_stat(z, build_structure(1, NormType::L1), Family::OnePar, 1) == std::vector<double>{4.0});
}

TEST_CASE("energy equals <S(z), theta> and the direct loop") {
  std::mt19937_64 gen(9);
  const auto s = build_structure(2, NormType::Linf);
  for (Family f : kFamilies) {
    for (int rep = 0; rep < 10; ++rep) {
      const auto z = testing::random_field(gen, Dims{6, 5}, 3, 0.1);
      const auto theta = testing::random_theta(gen, f, s, 3);
      const auto stat = suff_stat(z, s, f, 3);
      const auto vec = summarize_array(theta);
      double inner = 0.0;
      for (std::size_t m = 0; m < vec.size(); ++m) inner += stat[m] * vec[m];
      CHECK(energy(z, theta) == doctest::Approx(inner).epsilon(1e-12));
      CHECK(energy(z, theta) == doctest::Approx(testing::direct_energy(z, theta)).epsilon(1e-12));
    }
  }
}

TEST_CASE("conditional probabilities match full-energy ratios") {
  std::mt19937_64 gen(13);
  const auto s = build_structure(2, NormType::L1);
  for (Family f : kFamilies) {
    const auto z = testing::random_field(gen, Dims{5, 4}, 2, 0.15);
    const auto theta = testing::random_theta(gen, f, s, 2);
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 4; ++j) {
        if (!z.in_lattice(i, j)) {
          CHECK_THROWS(conditional_probs(z, {i, j}, theta));
          continue;
        }
        const auto p = conditional_probs(z, {i, j}, theta);
        const auto q = testing::brute_conditional(z, {i, j}, theta);
        for (std::size_t k = 0; k < p.size(); ++k) CHECK(p[k] == doctest::Approx(q[k]).epsilon(1e-12));
      }
    }
  }
  const auto z = testing::random_field(gen, Dims{2, 2}, 1);
  CHECK_THROWS_AS(local_field(z, {2, 0}, expand_array(std::vector<double>{1.0}, Family::OnePar, s, 1)),
                  std::out_of_range);
}

TEST_CASE("local field of a lone pixel is zero") {
  const DiscreteField z(Dims{1, 1}, {1});
  const auto theta = expand_array(std::vector<double>{-3.0}, Family::OnePar, build_structure(1, NormType::L1), 1);
  CHECK(local_field(z, {0, 0}, theta) == std::vector<double>{0.0, 0.0});
}

TEST_CASE("PL gradient matches central differences") {
  std::mt19937_64 gen(17);
  const auto s = build_structure(1.5, NormType::L2);
  for (Family f : kFamilies) {
    const auto z = testing::random_field(gen, Dims{6, 6}, 2, 0.1);
    const auto v = testing::random_vector(gen, free_dimension(f, s.size(), 2), -1.0, 1.0);
    const auto g = pl_gradient(z, v, f, s, 2);
    for (std::size_t m = 0; m < v.size(); ++m) {
      auto up = v;
      auto dn = v;
      up[m] += 1e-5;
      dn[m] -= 1e-5;
      const double fd = (pseudo_likelihood(z, expand_array(up, f, s, 2)) -
                         pseudo_likelihood(z, expand_array(dn, f, s, 2))) / 2e-5;
      CHECK(g[m] == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("PL evaluation does not depend on the thread count") {
  std::mt19937_64 gen(19);
  const auto s = build_structure(2, NormType::L1);
  const auto z = testing::random_field(gen, Dims{120, 110}, 2);
  const auto theta = testing::random_theta(gen, Family::Dif, s, 2);
  const auto one = evaluate_pl(z, theta, true, 1);
  const auto four = evaluate_pl(z, theta, true, 4);
  CHECK(one.log_pl == four.log_pl);
  CHECK(one.gradient == four.gradient);
}

TEST_CASE("theta = 0 gives log PL = -n log(C+1)") {
  std::mt19937_64 gen(23);
  const auto z = testing::random_field(gen, Dims{10, 10}, 3, 0.2);
  const auto theta = expand_array(std::vector<double>(3, 0.0), Family::AbsDif, InteractionStructure({{1, 0}}), 3);
  CHECK(pseudo_likelihood(z, theta) == doctest::Approx(-static_cast<double>(z.lattice_size()) * std::log(4.0)));
}
