#include <doctest.h>

#include <cmath>
#include <set>

#include "zetalab/numeric.hpp"
#include "zetalab/rng.hpp"

using namespace zetalab;

TEST_CASE("philox known-answer vectors") {
  using A4 = std::array<std::uint32_t, 4>;
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
        A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
        A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and separated by address") {
  RngStream a(42, 7, StreamPurpose::kCoefficients);
  RngStream b(42, 7, StreamPurpose::kCoefficients);
  RngStream c(42, 8, StreamPurpose::kCoefficients);
  RngStream d(42, 7, StreamPurpose::kFrequencies);
  RngStream e(43, 7, StreamPurpose::kCoefficients);
  bool differs_c = false, differs_d = false, differs_e = false;
  for (int i = 0; i < 64; ++i) {
    const auto va = a();
    CHECK(va == b());
    differs_c |= va != c();
    differs_d |= va != d();
    differs_e |= va != e();
  }
  CHECK(differs_c);
  CHECK(differs_d);
  CHECK(differs_e);
}

TEST_CASE("uniform stays inside the open unit interval") {
  RngStream r(1, 0, 1u);
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("normal and exponential moments") {
  RngStream r(9, 3, 2u);
  RunningStats n, e;
  RunningStats n4;
  const int count = 400000;
  for (int i = 0; i < count; ++i) {
    const double z = r.normal();
    n.add(z);
    n4.add(z * z * z * z);
    e.add(r.exponential());
  }
  CHECK(std::fabs(n.mean()) < 4.0 / std::sqrt(count));
  CHECK(std::fabs(n.variance() - 1.0) < 4.0 * std::sqrt(2.0 / count));
  CHECK(std::fabs(n4.mean() - 3.0) < 4.0 * std::sqrt(96.0 / count));
  CHECK(std::fabs(e.mean() - 1.0) < 4.0 / std::sqrt(count));
  CHECK(std::fabs(e.variance() - 1.0) < 4.0 * std::sqrt(8.0 / count));
}
