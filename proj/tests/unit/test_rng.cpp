#include <doctest.h>

#include <cmath>

#include <set>

#include "lfpp/common.hpp"
#include "lfpp/rng.hpp"

using namespace lfpp;

// Known-answer vectors of Philox4x32-10 from the Random123 distribution.
TEST_CASE("philox known answers") {
  auto a = Philox4x32::block({0, 0, 0, 0}, {0, 0});
  CHECK(a == Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  auto b = Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  CHECK(b == Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  auto c = Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
  CHECK(c == Philox4x32::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and distinct") {
  auto s1 = make_stream(7, StreamPurpose::spectral_noise, 3);
  auto s2 = make_stream(7, StreamPurpose::spectral_noise, 3);
  auto s3 = make_stream(7, StreamPurpose::spectral_noise, 4);
  auto s4 = make_stream(8, StreamPurpose::spectral_noise, 3);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto v = s1();
    CHECK(v == s2());
    seen.insert(v);
    seen.insert(s3());
    seen.insert(s4());
  }
  CHECK(seen.size() == 3000);
}

TEST_CASE("uniforms lie in [0, 1) with the right mean") {
  auto s = make_stream(1, StreamPurpose::test_data, 0);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
}
