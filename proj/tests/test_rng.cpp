#include "mdstop/rng.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>
#include <vector>

using mdstop::RngStream;
using mdstop::StreamId;

TEST_CASE("equal seed material reproduces the draw sequence") {
  RngStream a(99, {3, 7, 11, false});
  RngStream b(99, {3, 7, 11, false});
  for (int i = 0; i < 10000; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("any id field change moves the stream") {
  RngStream base(99, {3, 7, 11, false});
  const std::uint64_t first = base.next_u64();
  for (StreamId id : {StreamId{4, 7, 11, false}, StreamId{3, 8, 11, false},
                      StreamId{3, 7, 12, false}, StreamId{3, 7, 11, true}}) {
    RngStream other(99, id);
    CHECK(other.next_u64() != first);
  }
  RngStream reseeded(100, {3, 7, 11, false});
  CHECK(reseeded.next_u64() != first);
}

TEST_CASE("distinct streams are uncorrelated") {
  RngStream a(5, {1, 0, 0, false});
  RngStream b(5, {1, 0, 1, false});
  RngStream c(5, {1, 0, 0, true}); // branch counterpart of a
  const int n = 100000;
  auto corr = [n](RngStream& x, RngStream& y) {
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
      const double u = x.uniform01(), v = y.uniform01();
      sx += u; sy += v; sxx += u * u; syy += v * v; sxy += u * v;
    }
    const double mx = sx / n, my = sy / n;
    return (sxy / n - mx * my) /
           std::sqrt((sxx / n - mx * mx) * (syy / n - my * my));
  };
  RngStream a2(5, {1, 0, 0, false});
  CHECK(std::fabs(corr(a, b)) < 0.02); // 3 sigma is ~0.0095 at n=1e5
  CHECK(std::fabs(corr(a2, c)) < 0.02);
}

TEST_CASE("uniform draws stay strictly inside (0,1)") {
  RngStream s(1, {1, 0, 0, false});
  for (int i = 0; i < 100000; ++i) {
    const double u = s.uniform01();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("normal draws have the right first moments") {
  RngStream s(2, {1, 0, 0, false});
  const int n = 200000;
  double sum = 0, sum2 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = s.normal();
    sum += z;
    sum2 += z * z;
  }
  CHECK(std::fabs(sum / n) < 0.01);          // ~4.5 sigma
  CHECK(std::fabs(sum2 / n - 1.0) < 0.015);  // ~4.7 sigma
}

TEST_CASE("chi-square draws match the dof in mean and variance") {
  for (unsigned dof : {5u, 6u, 8u}) {
    RngStream s(3, {1, dof, 0, false});
    const int n = 200000;
    double sum = 0, sum2 = 0;
    for (int i = 0; i < n; ++i) {
      const double y = s.chi_square(dof);
      REQUIRE(y > 0.0);
      sum += y;
      sum2 += y * y;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::fabs(mean - dof) < 0.05);
    CHECK(std::fabs(var - 2.0 * dof) < 0.05 * 2.0 * dof);
  }
}

TEST_CASE("scaled-t moments at dof 6") {
  RngStream s(42, {1, 0, 0, false});
  const int n = 1000000;
  double m1 = 0, m2 = 0, m4 = 0;
  for (int i = 0; i < n; ++i) {
    const double v = s.scaled_t(6);
    m1 += v;
    m2 += v * v;
    m4 += v * v * v * v;
  }
  CHECK(std::fabs(m1 / n) < 0.005);
  CHECK(std::fabs(m2 / n - 1.0) < 0.01);
  // E[V^4] = 3(dof-2)/(dof-4) = 6; wide band, the eighth moment is infinite
  CHECK(m4 / n > 5.1);
  CHECK(m4 / n < 6.9);
}

TEST_CASE("scaled-t rejects dof below five") {
  RngStream s(1, {1, 0, 0, false});
  CHECK_THROWS_AS(s.scaled_t(4), std::invalid_argument);
  CHECK_NOTHROW(s.scaled_t(5));
}
