#include "mdstop/schedule.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <stdexcept>

using mdstop::BatchSchedule;

TEST_CASE("polynomial bounds match t^5") {
  const auto s = BatchSchedule::polynomial(5);
  CHECK(s.bound(0) == 0);
  CHECK(s.bound(1) == 1);
  CHECK(s.bound(2) == 32);
  CHECK(s.bound(3) == 243);
  CHECK(s.bound(10) == 100000);
}

TEST_CASE("batch sizes are consecutive differences") {
  const auto s = BatchSchedule::polynomial(5);
  CHECK(s.size(1) == 1);
  CHECK(s.size(2) == 31);
  CHECK(s.size(3) == 211);
  CHECK_THROWS_AS(s.size(0), std::invalid_argument);

  // bound(t) - bound(t-1) == size(t) > 0 on a prefix
  for (std::uint64_t t = 1; t <= 200; ++t) {
    CHECK(s.bound(t) - s.bound(t - 1) == s.size(t));
    CHECK(s.size(t) > 0);
  }
}

TEST_CASE("polynomial batch sizes grow strictly for exponent >= 2") {
  for (unsigned ell : {2u, 3u, 5u}) {
    const auto s = BatchSchedule::polynomial(ell);
    for (std::uint64_t t = 1; t <= 100; ++t)
      CHECK(s.size(t + 1) > s.size(t));
  }
}

TEST_CASE("adjacent batch size ratio approaches one") {
  const auto s = BatchSchedule::polynomial(5);
  const double ratio = static_cast<double>(s.size(100)) / static_cast<double>(s.size(101));
  CHECK(ratio >= 0.95);
  CHECK(ratio <= 1.0);
}

TEST_CASE("polynomial overflow is an error, not a wrap") {
  const auto s = BatchSchedule::polynomial(5);
  CHECK(s.max_batch() == 7131);
  CHECK_NOTHROW(s.bound(7131));
  CHECK_THROWS_AS(s.bound(7132), std::overflow_error);
}

TEST_CASE("explicit schedules validate and bound-check") {
  const auto s = BatchSchedule::explicit_list({1, 32, 243});
  CHECK(s.bound(0) == 0);
  CHECK(s.bound(3) == 243);
  CHECK(s.size(2) == 31);
  CHECK(s.max_batch() == 3);
  CHECK_THROWS_AS(s.bound(4), std::out_of_range);

  CHECK_THROWS_AS(BatchSchedule::explicit_list({}), std::invalid_argument);
  CHECK_THROWS_AS(BatchSchedule::explicit_list({1, 1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(BatchSchedule::explicit_list({3, 2}), std::invalid_argument);
  CHECK_THROWS_AS(BatchSchedule::explicit_list({0, 1}), std::invalid_argument);
}

TEST_CASE("config strings parse and round-trip") {
  const auto poly = BatchSchedule::parse("poly:5");
  CHECK(poly.kind() == BatchSchedule::Kind::polynomial);
  CHECK(poly.bound(2) == 32);
  CHECK(poly.to_string() == "poly:5");

  const auto expl = BatchSchedule::parse("explicit:1,32,243");
  CHECK(expl.bound(2) == 32);
  CHECK(expl.to_string() == "explicit:1,32,243");

  CHECK_THROWS_AS(BatchSchedule::parse("poly:0"), std::invalid_argument);
  CHECK_THROWS_AS(BatchSchedule::parse("poly:x"), std::invalid_argument);
  CHECK_THROWS_AS(BatchSchedule::parse("explicit:"), std::invalid_argument);
  CHECK_THROWS_AS(BatchSchedule::parse("explicit:1,2,"), std::invalid_argument);
  CHECK_THROWS_AS(BatchSchedule::parse("linear:3"), std::invalid_argument);
}
