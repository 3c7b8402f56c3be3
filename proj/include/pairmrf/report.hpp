#pragma once

#include <string>
#include <vector>

#include "pairmrf/estimators.hpp"
#include "pairmrf/hmrf.hpp"

namespace pairmrf {

/// Per-position max |free parameter| divided by the largest such value over
/// all positions. All zeros when every potential vanishes.
std::vector<double> relative_contribution(const PotentialArray& theta);

/// "***" above 2/3, "**" above 1/3, "*" above 0.
std::string contribution_stars(double contribution);

/// Plain-text summaries laid out like the classic fit printouts.
std::string summary_report(const MrfFit& fit);
std::string summary_report(const HmrfFit& fit);

}  // namespace pairmrf
