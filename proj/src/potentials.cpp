#include "pairmrf/potentials.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace pairmrf {

std::string_view to_string(Family family) {
  switch (family) {
    case Family::OnePar: return "onepar";
    case Family::OneEach: return "oneeach";
    case Family::AbsDif: return "absdif";
    case Family::Dif: return "dif";
    case Family::Free: return "free";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  if (name == "onepar") return Family::OnePar;
  if (name == "oneeach") return Family::OneEach;
  if (name == "absdif") return Family::AbsDif;
  if (name == "dif") return Family::Dif;
  if (name == "free") return Family::Free;
  throw std::invalid_argument("unknown restriction family '" + std::string(name) + "'");
}

std::size_t free_dimension(Family family, std::size_t n_positions, int max_label) {
  if (max_label < 1) throw std::invalid_argument("restriction families need C >= 1");
  const auto c = static_cast<std::size_t>(max_label);
  switch (family) {
    case Family::OnePar: return 1;
    case Family::OneEach: return n_positions;
    case Family::AbsDif: return n_positions * c;
    case Family::Dif: return n_positions * 2 * c;
    case Family::Free: return n_positions * ((c + 1) * (c + 1) - 1);
  }
  return 0;
}

ParameterMap::ParameterMap(Family family, std::size_t n_positions, int max_label)
    : family_(family),
      n_positions_(n_positions),
      max_label_(max_label),
      dimension_(free_dimension(family, n_positions, max_label)) {
  const int n = num_colors();
  const int c = max_label;
  index_.assign(n_positions * static_cast<std::size_t>(n * n), -1);
  for (std::size_t k = 0; k < n_positions; ++k) {
    const int base = static_cast<int>(k);
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        int m = -1;
        const int d = b - a;
        switch (family) {
          case Family::OnePar:
            if (d != 0) m = 0;
            break;
          case Family::OneEach:
            if (d != 0) m = base;
            break;
          case Family::AbsDif:
            if (d != 0) m = base * c + std::abs(d) - 1;
            break;
          case Family::Dif:
            if (d != 0) m = base * 2 * c + (d < 0 ? d + c : c + d - 1);
            break;
          case Family::Free:
            if (a != 0 || b != 0) m = base * (n * n - 1) + a * n + b - 1;
            break;
        }
        index_[(k * n + static_cast<std::size_t>(a)) * n + static_cast<std::size_t>(b)] = m;
      }
    }
  }
}

std::optional<std::size_t> ParameterMap::owner(std::size_t m) const {
  if (m >= dimension_) throw std::out_of_range("free parameter index out of range");
  const auto c = static_cast<std::size_t>(max_label_);
  switch (family_) {
    case Family::OnePar: return std::nullopt;
    case Family::OneEach: return m;
    case Family::AbsDif: return m / c;
    case Family::Dif: return m / (2 * c);
    case Family::Free: return m / ((c + 1) * (c + 1) - 1);
  }
  return std::nullopt;
}

PotentialArray PotentialArray::scaled(double factor) const {
  PotentialArray out = *this;
  for (auto& v : out.values_) v *= factor;
  return out;
}

PotentialArray expand_array(std::span<const double> theta_vec, Family family, const InteractionStructure& structure,
                            int max_label) {
  if (structure.empty()) throw std::invalid_argument("potential arrays need at least one interacting position");
  const ParameterMap map(family, structure.size(), max_label);
  if (theta_vec.size() != map.dimension()) {
    throw std::invalid_argument("family " + std::string(to_string(family)) + " expects " +
                                std::to_string(map.dimension()) + " free parameters, got " +
                                std::to_string(theta_vec.size()));
  }
  PotentialArray out;
  out.structure_ = structure;
  out.family_ = family;
  out.max_label_ = max_label;
  out.values_.resize(map.entries().size());
  for (std::size_t i = 0; i < out.values_.size(); ++i) {
    const int m = map.entries()[i];
    out.values_[i] = m < 0 ? 0.0 : theta_vec[static_cast<std::size_t>(m)];
  }
  return out;
}

std::vector<double> summarize_array(const PotentialArray& theta) {
  const ParameterMap map(theta.family(), theta.n_positions(), theta.max_label());
  std::vector<double> out(map.dimension(), 0.0);
  std::vector<bool> seen(map.dimension(), false);
  const auto values = theta.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const int m = map.entries()[i];
    if (m < 0 || seen[static_cast<std::size_t>(m)]) continue;
    out[static_cast<std::size_t>(m)] = values[i];
    seen[static_cast<std::size_t>(m)] = true;
  }
  return out;
}

PotentialArray validate_family(std::span<const double> raw, Family family, const InteractionStructure& structure,
                               int max_label, double tolerance) {
  if (structure.empty()) throw std::invalid_argument("potential arrays need at least one interacting position");
  const ParameterMap map(family, structure.size(), max_label);
  if (raw.size() != map.entries().size()) {
    throw std::invalid_argument("potential tensor has " + std::to_string(raw.size()) + " entries, expected " +
                                std::to_string(map.entries().size()));
  }
  const int n = map.num_colors();
  std::vector<double> vec(map.dimension(), 0.0);
  std::vector<bool> seen(map.dimension(), false);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double v = raw[i];
    if (!std::isfinite(v)) throw std::invalid_argument("potentials must be finite");
    const int m = map.entries()[i];
    const std::size_t k = i / static_cast<std::size_t>(n * n);
    if (m < 0) {
      if (std::abs(v) > tolerance) {
        const bool origin = i % static_cast<std::size_t>(n * n) == 0;
        throw std::invalid_argument(origin ? "identifiability violated: theta(0,0) != 0 at position " +
                                                 to_string(structure[k])
                                           : "entry fixed at zero by family " + std::string(to_string(family)) +
                                                 " is nonzero at position " + to_string(structure[k]));
      }
      continue;
    }
    const auto mu = static_cast<std::size_t>(m);
    if (!seen[mu]) {
      vec[mu] = v;
      seen[mu] = true;
    } else if (std::abs(v - vec[mu]) > tolerance) {
      throw std::invalid_argument("potentials at position " + to_string(structure[k]) +
                                  " violate the equality pattern of family " + std::string(to_string(family)));
    }
  }
  return expand_array(vec, family, structure, max_label);
}

PotentialArray ModelSpec::to_array(const std::optional<InteractionStructure>& override_structure) const {
  if (structure && override_structure && !(*structure == *override_structure)) {
    throw std::invalid_argument("model spec positions differ from the requested interaction structure");
  }
  const auto& s = structure ? structure : override_structure;
  if (!s) throw std::invalid_argument("model spec has no positions and no interaction structure was given");
  return expand_array(theta, family, *s, max_label);
}

ModelSpec read_model_spec(std::istream& in) {
  std::string text;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    text += line.substr(0, hash);
    text += '\n';
  }
  std::istringstream ts(text);
  ModelSpec spec;
  bool have_c = false;
  bool have_family = false;
  bool have_theta = false;
  std::string key;
  auto fail = [](const std::string& msg) { throw std::invalid_argument("model spec: " + msg); };
  while (ts >> key) {
    if (key == "C") {
      if (!(ts >> spec.max_label) || spec.max_label < 1) fail("C must be an integer >= 1");
      have_c = true;
    } else if (key == "family") {
      std::string name;
      if (!(ts >> name)) fail("missing family name");
      spec.family = parse_family(name);
      have_family = true;
    } else if (key == "positions") {
      long n = -1;
      if (!(ts >> n) || n < 0) fail("positions needs a count");
      std::vector<Offset> pos(static_cast<std::size_t>(n));
      for (auto& r : pos) {
        if (!(ts >> r.row >> r.col)) fail("truncated positions block");
      }
      spec.structure = InteractionStructure(std::move(pos));
    } else if (key == "theta") {
      long n = -1;
      if (!(ts >> n) || n < 0) fail("theta needs a count");
      spec.theta.resize(static_cast<std::size_t>(n));
      for (auto& v : spec.theta) {
        std::string tok;
        if (!(ts >> tok)) fail("truncated theta block");
        char* end = nullptr;
        v = std::strtod(tok.c_str(), &end);
        if (end != tok.c_str() + tok.size() || !std::isfinite(v)) fail("invalid theta value '" + tok + "'");
      }
      have_theta = true;
    } else {
      fail("unknown key '" + key + "'");
    }
  }
  if (!have_c || !have_family || !have_theta) fail("C, family and theta are required");
  if (spec.structure) {
    const auto dim = free_dimension(spec.family, spec.structure->size(), spec.max_label);
    if (dim != spec.theta.size()) fail("theta length does not match family and positions");
  }
  return spec;
}

void write_model_spec(const PotentialArray& theta, std::ostream& out) {
  out << "C " << theta.max_label() << '\n';
  out << "family " << to_string(theta.family()) << '\n';
  out << "positions " << theta.n_positions() << '\n';
  for (const Offset r : theta.structure().positions()) out << r.row << ' ' << r.col << '\n';
  const auto vec = summarize_array(theta);
  out << "theta " << vec.size() << '\n';
  char buf[64];
  for (std::size_t i = 0; i < vec.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", vec[i]);
    out << (i > 0 ? " " : "") << buf;
  }
  out << '\n';
}

}  // namespace pairmrf
