#include "pairmrf/interactions.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace pairmrf {

std::string to_string(Offset r) { return "(" + std::to_string(r.row) + "," + std::to_string(r.col) + ")"; }

NormType parse_norm_type(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "1" || s == "l1") return NormType::L1;
  if (s == "2" || s == "l2") return NormType::L2;
  if (s == "m" || s == "max" || s == "inf" || s == "linf") return NormType::Linf;
  throw std::invalid_argument("unknown norm type '" + std::string(name) + "'");
}

InteractionStructure::InteractionStructure(std::vector<Offset> positions) : positions_(std::move(positions)) {
  for (std::size_t i = 0; i < positions_.size(); ++i) {
    const Offset r = positions_[i];
    if (r.is_origin()) throw std::invalid_argument("interaction structure cannot contain (0,0)");
    for (std::size_t j = 0; j < i; ++j) {
      if (positions_[j] == r) throw std::invalid_argument("duplicate position " + to_string(r));
      if (positions_[j] == -r) {
        throw std::invalid_argument("positions " + to_string(positions_[j]) + " and " + to_string(r) +
                                    " are reflections of each other");
      }
    }
  }
}

std::optional<std::size_t> InteractionStructure::find(Offset r) const {
  for (std::size_t k = 0; k < positions_.size(); ++k) {
    if (positions_[k] == r || positions_[k] == -r) return k;
  }
  return std::nullopt;
}

bool InteractionStructure::equivalent(const InteractionStructure& other) const {
  if (size() != other.size()) return false;
  return std::all_of(positions_.begin(), positions_.end(), [&](Offset r) { return other.contains(r); });
}

namespace {

// Exact test of an integer squared length against a real radius squared.
bool within_l2(long long squared, double max_norm) {
  const double p = max_norm * max_norm;
  const double e = std::fma(max_norm, max_norm, -p);  // max_norm^2 == p + e exactly
  const double s = static_cast<double>(squared);
  if (s < 0.5 * p) return true;
  if (s > 2.0 * p) return false;
  return s - p <= e;  // exact by Sterbenz in this range
}

bool canonical(Offset r) { return r.row > 0 || (r.row == 0 && r.col > 0); }

}  // namespace

InteractionStructure build_structure(double max_norm, NormType norm, std::span<const Offset> extra) {
  if (!(max_norm >= 0.0) || !std::isfinite(max_norm)) throw std::invalid_argument("max_norm must be a finite value >= 0");
  const int reach = static_cast<int>(std::floor(max_norm));

  struct Keyed {
    long long norm_key;
    Offset r;
  };
  std::vector<Keyed> ball;
  for (int r1 = 0; r1 <= reach; ++r1) {
    for (int r2 = -reach; r2 <= reach; ++r2) {
      const Offset r{r1, r2};
      if (!canonical(r)) continue;
      long long key = 0;
      bool inside = false;
      switch (norm) {
        case NormType::L1:
          key = std::abs(r1) + std::abs(r2);
          inside = static_cast<double>(key) <= max_norm;
          break;
        case NormType::Linf:
          key = std::max(std::abs(r1), std::abs(r2));
          inside = static_cast<double>(key) <= max_norm;
          break;
        case NormType::L2:
          key = static_cast<long long>(r1) * r1 + static_cast<long long>(r2) * r2;
          inside = within_l2(key, max_norm);
          break;
      }
      if (inside) ball.push_back({key, r});
    }
  }
  std::sort(ball.begin(), ball.end(), [](const Keyed& a, const Keyed& b) {
    return std::tie(a.norm_key, a.r.col, a.r.row) < std::tie(b.norm_key, b.r.col, b.r.row);
  });

  std::vector<Offset> extras;
  for (const Offset e : extra) {
    if (e.is_origin()) throw std::invalid_argument("interaction structure cannot contain (0,0)");
    if (std::find(extras.begin(), extras.end(), e) != extras.end()) continue;
    if (std::find(extras.begin(), extras.end(), -e) != extras.end()) {
      throw std::invalid_argument("extra positions " + to_string(-e) + " and " + to_string(e) +
                                  " are reflections of each other");
    }
    extras.push_back(e);
  }

  std::vector<Offset> out;
  for (const auto& k : ball) {
    const bool overridden = std::any_of(extras.begin(), extras.end(), [&](Offset e) { return e == k.r || e == -k.r; });
    if (!overridden) out.push_back(k.r);
  }
  out.insert(out.end(), extras.begin(), extras.end());
  return InteractionStructure(std::move(out));
}

InteractionStructure unite(const InteractionStructure& a, const InteractionStructure& b) {
  std::vector<Offset> out(a.positions().begin(), a.positions().end());
  for (const Offset r : b.positions()) {
    if (!a.contains(r)) out.push_back(r);
  }
  return InteractionStructure(std::move(out));
}

InteractionStructure unite(const InteractionStructure& a, Offset r) {
  if (r.is_origin()) throw std::invalid_argument("cannot add (0,0) to an interaction structure");
  return unite(a, InteractionStructure({r}));
}

InteractionStructure difference(const InteractionStructure& a, const InteractionStructure& b) {
  std::vector<Offset> out;
  for (const Offset r : a.positions()) {
    if (!b.contains(r)) out.push_back(r);
  }
  return InteractionStructure(std::move(out));
}

InteractionStructure difference(const InteractionStructure& a, Offset r) {
  if (r.is_origin()) return a;
  return difference(a, InteractionStructure({r}));
}

InteractionStructure subset(const InteractionStructure& a, std::span<const std::size_t> indices) {
  std::vector<Offset> out;
  out.reserve(indices.size());
  for (const std::size_t idx : indices) {
    if (idx >= a.size()) {
      throw std::out_of_range("subset index " + std::to_string(idx) + " out of range for a structure of " +
                              std::to_string(a.size()) + " positions");
    }
    out.push_back(a[idx]);
  }
  return InteractionStructure(std::move(out));
}

InteractionStructure read_structure(std::istream& in) {
  std::vector<Offset> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    Offset r;
    std::string trailing;
    if (!(ls >> r.row >> r.col) || (ls >> trailing)) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": expected 'r1 r2'");
    }
    out.push_back(r);
  }
  return InteractionStructure(std::move(out));
}

void write_structure(const InteractionStructure& structure, std::ostream& out) {
  for (const Offset r : structure.positions()) out << r.row << ' ' << r.col << '\n';
}

}  // namespace pairmrf
