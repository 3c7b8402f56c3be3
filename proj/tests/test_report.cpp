#include <doctest.h>

#include "pairmrf/report.hpp"

using namespace pairmrf;

TEST_CASE("relative contribution and stars") {
  const InteractionStructure s({{1, 0}, {0, 1}, {1, 1}});
  const auto theta = expand_array(std::vector<double>{-2.0, 1.0, 0.5}, Family::OneEach, s, 1);
  const auto c = relative_contribution(theta);
  REQUIRE(c.size() == 3);
  CHECK(c[0] == doctest::Approx(1.0));
  CHECK(c[1] == doctest::Approx(0.5));
  CHECK(c[2] == doctest::Approx(0.25));
  CHECK(contribution_stars(c[0]) == "***");
  CHECK(contribution_stars(c[1]) == "**");
  CHECK(contribution_stars(c[2]) == "*");
  CHECK(contribution_stars(0.0).empty());
  const auto zero = relative_contribution(expand_array(std::vector<double>{0, 0, 0}, Family::OneEach, s, 1));
  for (double v : zero) CHECK(v == 0.0);
}

TEST_CASE("fit summary layout") {
  const DiscreteField z(Dims{4, 4}, {0, 0, 1, 1, 0, 1, 1, 0, 1, 0, 0, 1, 1, 1, 0, 0});
  const MrfFit fit = fit_pl(z, InteractionStructure({{1, 0}, {0, 1}}), Family::OneEach);
  const std::string text = summary_report(fit);
  CHECK(text.find("Model adjusted via Pseudolikelihood") == 0);
  CHECK(text.find("Image dimension: 4 4") != std::string::npos);
  CHECK(text.find("2 colors") != std::string::npos);
  CHECK(text.find("Rel. Contribution") != std::string::npos);
}

TEST_CASE("mixture summary layout") {
  HmrfFit fit;
  fit.params = {{1.0, 4.0}, {0.5, 0.6}, {}};
  fit.z_pred = DiscreteField(Dims{1, 3}, {0, 1, 1});
  fit.counts = {1, 2};
  fit.structure = InteractionStructure({{1, 0}});
  fit.iterations = 9;
  const std::string text = summary_report(fit);
  CHECK(text.find("Gaussian mixture model driven by Hidden MRF fitted by EM-algorithm.") == 0);
  CHECK(text.find("Model fitted in 9 iterations.") != std::string::npos);
  CHECK(text.find("4.00") != std::string::npos);
}
