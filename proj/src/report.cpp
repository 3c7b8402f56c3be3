#include "pairmrf/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace pairmrf {

std::vector<double> relative_contribution(const PotentialArray& theta) {
  std::vector<double> out = position_strength(theta);
  const double top = out.empty() ? 0.0 : *std::max_element(out.begin(), out.end());
  for (auto& v : out) v = top > 0 ? v / top : 0.0;
  return out;
}

std::string contribution_stars(double contribution) {
  if (contribution > 2.0 / 3.0) return "***";
  if (contribution > 1.0 / 3.0) return "**";
  if (contribution > 0.0) return "*";
  return "";
}

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

void color_table(std::ostringstream& out, const std::vector<std::int64_t>& counts) {
  std::size_t width = 1;
  for (auto c : counts) width = std::max(width, std::to_string(c).size());
  width += 1;
  for (std::size_t k = 0; k < counts.size(); ++k) out << pad_left(std::to_string(k), width);
  out << '\n';
  for (auto c : counts) out << pad_left(std::to_string(c), width);
  out << '\n';
}

std::string parameter_heading(Family family, int max_label) {
  switch (family) {
    case Family::OnePar:
    case Family::OneEach:
      return "Interactions for different-valued pairs:";
    case Family::AbsDif:
      return "Interactions by absolute difference |b-a| = 1.." + std::to_string(max_label) + ":";
    case Family::Dif:
      return "Interactions by difference b-a = -" + std::to_string(max_label) + "..-1, 1.." +
             std::to_string(max_label) + ":";
    case Family::Free:
      break;
  }
  return "Potentials theta(a,b), row-major over (a,b) != (0,0):";
}

}  // namespace

std::string summary_report(const MrfFit& fit) {
  std::ostringstream out;
  out << "Model adjusted via "
      << (fit.method == FitMethod::PseudoLikelihood ? "Pseudolikelihood" : "Stochastic Approximation") << '\n';
  out << "Image dimension: " << fit.dims.rows << ' ' << fit.dims.cols << '\n';
  out << fit.color_counts.size() << " colors, distributed as:\n";
  color_table(out, fit.color_counts);
  const PotentialArray& theta = fit.theta;
  if (theta.n_positions() == 0) return out.str();

  out << '\n' << parameter_heading(theta.family(), theta.max_label()) << '\n';
  out << "Position|  Value  Rel. Contribution\n";
  const ParameterMap map(theta.family(), theta.n_positions(), theta.max_label());
  const auto vec = summarize_array(theta);
  const auto contribution = relative_contribution(theta);
  for (std::size_t k = 0; k < theta.n_positions(); ++k) {
    std::string values;
    for (std::size_t m = 0; m < vec.size(); ++m) {
      const auto owner = map.owner(m);
      if (owner && *owner != k) continue;
      values += ' ' + pad_left(fixed(vec[m], 3), 6);
    }
    out << pad_left(to_string(theta.structure()[k]), 8) << '|' << values << "  " << fixed(contribution[k], 3) << ' '
        << contribution_stars(contribution[k]) << '\n';
  }
  return out.str();
}

std::string summary_report(const HmrfFit& fit) {
  std::ostringstream out;
  out << "Gaussian mixture model driven by Hidden MRF fitted by EM-algorithm.\n";
  out << "Image dimensions: " << fit.z_pred.rows() << ' ' << fit.z_pred.cols() << '\n';
  out << "Predicted mixture component table:\n";
  color_table(out, fit.counts);
  out << "Number of covariates (or basis functions): " << fit.n_basis << '\n';
  out << "Interaction structure considered:";
  for (const Offset r : fit.structure.positions()) out << ' ' << to_string(r);
  out << "\n\nMixture parameters:\n";
  out << " Component     mu  sigma\n";
  for (std::size_t k = 0; k < fit.params.mu.size(); ++k) {
    out << pad_left(std::to_string(k), 10) << ' ' << pad_left(fixed(fit.params.mu[k], 2), 6) << ' '
        << pad_left(fixed(fit.params.sigma[k], 2), 6) << '\n';
  }
  out << "\nModel fitted in " << fit.iterations << " iterations.\n";
  return out.str();
}

}  // namespace pairmrf
