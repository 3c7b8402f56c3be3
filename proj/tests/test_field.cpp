#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "pairmrf/field.hpp"
#include "pairmrf/field_io.hpp"

using namespace pairmrf;

TEST_CASE("discrete field infers or keeps the maximum label") {
  const DiscreteField z(Dims{2, 2}, {0, 1, 1, DiscreteField::kMasked});
  CHECK(z.max_label() == 1);
  CHECK(z.lattice_size() == 3);
  CHECK(z.distinct_labels() == 2);
  CHECK(z.color_counts() == std::vector<std::int64_t>{1, 2});

  const DiscreteField wide(Dims{1, 2}, {0, 1}, 3);
  CHECK(wide.num_colors() == 4);
  CHECK(wide.color_counts() == std::vector<std::int64_t>{1, 1, 0, 0});
}

TEST_CASE("discrete field rejects malformed input") {
  CHECK_THROWS(DiscreteField(Dims{2, 2}, {0, 1, 2}));
  CHECK_THROWS(DiscreteField(Dims{1, 2}, {0, -2}));
  CHECK_THROWS(DiscreteField(Dims{1, 2}, {DiscreteField::kMasked, DiscreteField::kMasked}));
  CHECK_THROWS(DiscreteField(Dims{1, 2}, {0, 3}, 2));
}

TEST_CASE("with_labels keeps mask and C") {
  const DiscreteField z(Dims{1, 3}, {0, DiscreteField::kMasked, 1}, 2);
  const DiscreteField w = z.with_labels({2, DiscreteField::kMasked, 0});
  CHECK(w.max_label() == 2);
  CHECK(w.mask() == z.mask());
}

TEST_CASE("real field treats NaN as outside the lattice") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const RealField y(Dims{1, 3}, {1.5, nan, -2.0});
  CHECK(y.lattice_size() == 2);
  CHECK_FALSE(y.in_lattice(1));
  CHECK(y == RealField(Dims{1, 3}, {1.5, nan, -2.0}));
  CHECK_THROWS(RealField(Dims{1, 1}, {std::numeric_limits<double>::infinity()}));
}

TEST_CASE("text grid round trip with mask and declared C") {
  const DiscreteField z(Dims{2, 3}, {0, 1, DiscreteField::kMasked, 1, 0, 0}, 3);
  std::stringstream ss;
  write_discrete_field(z, ss);
  CHECK(read_discrete_field(ss) == z);
}

TEST_CASE("text grid parser diagnostics") {
  std::istringstream ragged("0 1\n1\n");
  CHECK_THROWS(read_discrete_field(ragged));
  std::istringstream negative("0 -1\n");
  CHECK_THROWS(read_discrete_field(negative));
  std::istringstream empty("# nothing\n");
  CHECK_THROWS(read_discrete_field(empty));
  std::istringstream directive("#C=4\n0 1\nNA 2\n");
  const DiscreteField z = read_discrete_field(directive);
  CHECK(z.max_label() == 4);
  CHECK_FALSE(z.in_lattice(1, 0));
}

TEST_CASE("pgm round trip") {
  const DiscreteField z(Dims{3, 2}, {0, 1, 2, 3, 2, 1});
  std::stringstream ss;
  write_pgm(z, ss);
  const DiscreteField back = read_pgm(ss);
  CHECK(back.labels().size() == z.labels().size());
  CHECK(std::equal(back.labels().begin(), back.labels().end(), z.labels().begin()));

  std::istringstream plain("P2\n2 1\n255\n4 7\n");
  const DiscreteField p = read_pgm(plain);
  CHECK(p.at(0, 1) == 7);
}

TEST_CASE("real csv round trip is exact") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const RealField y(Dims{2, 2}, {0.1, 1.0 / 3.0, nan, -1e-300});
  std::stringstream ss;
  write_real_csv(y, ss);
  CHECK(read_real_csv(ss) == y);
}

TEST_CASE("region round trip") {
  const PixelRegion r(Dims{2, 2}, std::vector<std::uint8_t>{1, 0, 0, 1});
  std::stringstream ss;
  write_region(r, ss);
  const PixelRegion back = read_region(ss);
  CHECK(back == r);
  CHECK(back.count() == 2);
}
