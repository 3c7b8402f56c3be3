#include "pairmrf/field_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pairmrf {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

long parse_integer(std::string_view token, std::size_t line_no) {
  long value = 0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw std::invalid_argument("line " + std::to_string(line_no) + ": invalid token '" + std::string(token) + "'");
  }
  return value;
}

double parse_real(std::string_view token, std::size_t line_no) {
  std::string tmp(token);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size()) {
    throw std::invalid_argument("line " + std::to_string(line_no) + ": invalid number '" + tmp + "'");
  }
  return v;
}

}  // namespace

DiscreteField read_discrete_field(std::istream& in) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::istringstream lines(text);
  std::string line;
  std::vector<int> labels;
  std::size_t width = 0;
  int rows = 0;
  int declared_c = -1;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    const auto stripped = trim(line);
    if (stripped.empty()) continue;
    if (stripped.front() == '#') {
      if (stripped.starts_with("#C=")) {
        const long c = parse_integer(trim(stripped.substr(3)), line_no);
        if (c < 0) throw std::invalid_argument("line " + std::to_string(line_no) + ": negative C");
        declared_c = static_cast<int>(c);
      }
      continue;
    }
    const auto tokens = split_ws(stripped);
    if (rows == 0) {
      width = tokens.size();
    } else if (tokens.size() != width) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": ragged rows (expected " +
                                  std::to_string(width) + " values, got " + std::to_string(tokens.size()) + ")");
    }
    for (auto tok : tokens) {
      if (tok == "NA") {
        labels.push_back(DiscreteField::kMasked);
        continue;
      }
      const long v = parse_integer(tok, line_no);
      if (v < 0) throw std::invalid_argument("line " + std::to_string(line_no) + ": negative label");
      if (v > std::numeric_limits<int>::max()) throw std::invalid_argument("label out of range");
      labels.push_back(static_cast<int>(v));
    }
    ++rows;
  }
  if (rows == 0) throw std::invalid_argument("empty field input");
  return DiscreteField(Dims{rows, static_cast<int>(width)}, std::move(labels), declared_c);
}

void write_discrete_field(const DiscreteField& field, std::ostream& out) {
  const auto labels = field.labels();
  const int observed = *std::max_element(labels.begin(), labels.end());
  if (field.max_label() > observed) out << "#C=" << field.max_label() << '\n';
  for (int r = 0; r < field.rows(); ++r) {
    for (int c = 0; c < field.cols(); ++c) {
      if (c > 0) out << ' ';
      const int v = field.at(r, c);
      if (v == DiscreteField::kMasked) {
        out << "NA";
      } else {
        out << v;
      }
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing field");
}

namespace {

// Next header token of a netpbm file, skipping comments.
std::string pnm_token(std::istream& in) {
  std::string tok;
  while (true) {
    const int ch = in.get();
    if (ch == EOF) break;
    if (ch == '#') {
      std::string rest;
      std::getline(in, rest);
      if (!tok.empty()) break;
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  if (tok.empty()) throw std::invalid_argument("truncated PGM header");
  return tok;
}

}  // namespace

DiscreteField read_pgm(std::istream& in) {
  const std::string magic = pnm_token(in);
  if (magic != "P2" && magic != "P5") throw std::invalid_argument("not a PGM file (magic " + magic + ")");
  const long width = parse_integer(pnm_token(in), 0);
  const long height = parse_integer(pnm_token(in), 0);
  const long maxval = parse_integer(pnm_token(in), 0);
  if (width <= 0 || height <= 0) throw std::invalid_argument("invalid PGM dimensions");
  if (maxval <= 0 || maxval > 65535) throw std::invalid_argument("invalid PGM maxval");
  const Dims dims{static_cast<int>(height), static_cast<int>(width)};
  std::vector<int> labels(dims.size());
  if (magic == "P2") {
    for (auto& v : labels) {
      std::string tok;
      if (!(in >> tok)) throw std::invalid_argument("truncated PGM data");
      const long x = parse_integer(tok, 0);
      if (x < 0 || x > maxval) throw std::invalid_argument("PGM sample out of range");
      v = static_cast<int>(x);
    }
  } else {
    const bool wide = maxval > 255;
    for (auto& v : labels) {
      int x = in.get();
      if (x == EOF) throw std::invalid_argument("truncated PGM data");
      if (wide) {
        const int lo = in.get();
        if (lo == EOF) throw std::invalid_argument("truncated PGM data");
        x = (x << 8) | lo;
      }
      if (x > maxval) throw std::invalid_argument("PGM sample out of range");
      v = x;
    }
  }
  return DiscreteField(dims, std::move(labels));
}

void write_pgm(const DiscreteField& field, std::ostream& out) {
  if (field.lattice_size() != field.dims().size()) {
    throw std::invalid_argument("PGM cannot represent pixels outside the lattice");
  }
  const int maxval = std::max(field.max_label(), 1);
  if (maxval > 65535) throw std::invalid_argument("labels too large for PGM");
  out << "P5\n" << field.cols() << ' ' << field.rows() << '\n' << maxval << '\n';
  for (int v : field.labels()) {
    if (maxval > 255) out.put(static_cast<char>((v >> 8) & 0xff));
    out.put(static_cast<char>(v & 0xff));
  }
  if (!out) throw std::runtime_error("failed writing PGM");
}

RealField read_real_csv(std::istream& in) {
  std::string line;
  std::vector<double> values;
  std::size_t width = 0;
  int rows = 0;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    std::size_t count = 0;
    std::size_t start = 0;
    while (true) {
      const auto comma = stripped.find(',', start);
      const auto tok = trim(stripped.substr(start, comma == std::string_view::npos ? stripped.npos : comma - start));
      if (tok == "NA") {
        values.push_back(std::numeric_limits<double>::quiet_NaN());
      } else {
        const double v = parse_real(tok, line_no);
        if (!std::isfinite(v)) throw std::invalid_argument("line " + std::to_string(line_no) + ": non-finite value");
        values.push_back(v);
      }
      ++count;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (rows == 0) {
      width = count;
    } else if (count != width) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": ragged rows");
    }
    ++rows;
  }
  if (rows == 0) throw std::invalid_argument("empty field input");
  return RealField(Dims{rows, static_cast<int>(width)}, std::move(values));
}

void write_real_csv(const RealField& field, std::ostream& out) {
  char buf[64];
  for (int r = 0; r < field.rows(); ++r) {
    for (int c = 0; c < field.cols(); ++c) {
      if (c > 0) out << ',';
      const double v = field.at(r, c);
      if (std::isnan(v)) {
        out << "NA";
      } else {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf;
      }
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing CSV field");
}

PixelRegion read_region(std::istream& in) {
  const DiscreteField grid = read_discrete_field(in);
  std::vector<std::uint8_t> flags(grid.dims().size());
  for (std::size_t i = 0; i < flags.size(); ++i) {
    const int v = grid[i];
    if (v != 0 && v != 1) throw std::invalid_argument("region files must contain only 0 and 1");
    flags[i] = static_cast<std::uint8_t>(v);
  }
  return PixelRegion(grid.dims(), std::move(flags));
}

void write_region(const PixelRegion& region, std::ostream& out) {
  const Dims d = region.dims();
  for (int r = 0; r < d.rows; ++r) {
    for (int c = 0; c < d.cols; ++c) {
      if (c > 0) out << ' ';
      out << (region.at(r, c) ? 1 : 0);
    }
    out << '\n';
  }
}

namespace {

std::ifstream open_in(const std::filesystem::path& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

bool is_pgm(const std::filesystem::path& path) { return path.extension() == ".pgm"; }

}  // namespace

DiscreteField load_discrete_field(const std::filesystem::path& path) {
  auto in = open_in(path, is_pgm(path));
  return is_pgm(path) ? read_pgm(in) : read_discrete_field(in);
}

void save_discrete_field(const DiscreteField& field, const std::filesystem::path& path) {
  auto out = open_out(path, is_pgm(path));
  if (is_pgm(path)) {
    write_pgm(field, out);
  } else {
    write_discrete_field(field, out);
  }
}

RealField load_real_field(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_real_csv(in);
}

void save_real_field(const RealField& field, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_real_csv(field, out);
}

PixelRegion load_region(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_region(in);
}

}  // namespace pairmrf
