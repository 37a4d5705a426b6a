// schedule.hpp
//
// Deterministic batch structure. A schedule fixes the cumulative sample
// counts m(0)=0 < m(1) < m(2) < ... ; batch t covers the sample indices
// {m(t-1)+1, ..., m(t)} and has size m(t) - m(t-1).
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mdstop {

class BatchSchedule {
public:
  enum class Kind { polynomial, explicit_list };

  /// m(t) = t^exponent. Exponent must be >= 1; growth of the batch sizes
  /// requires exponent >= 2 (exponent 1 gives constant size-1 batches and
  /// is allowed only for degenerate test setups).
  static BatchSchedule polynomial(unsigned exponent);

  /// Explicit cumulative bounds m(1), m(2), ...; must be strictly
  /// increasing and positive. m(0)=0 is implicit.
  static BatchSchedule explicit_list(std::vector<std::uint64_t> bounds);

  /// Parses "poly:5" or "explicit:1,32,243".
  static BatchSchedule parse(std::string_view spec);

  Kind kind() const { return kind_; }
  unsigned exponent() const { return exponent_; }

  /// Cumulative sample count m(t). m(0) = 0.
  /// Throws std::out_of_range past the end of an explicit list and
  /// std::overflow_error when t^exponent does not fit in 64 bits
  /// (t <= 7131 for exponent 5).
  std::uint64_t bound(std::uint64_t t) const;

  /// Batch size m(t) - m(t-1) for t >= 1; always positive.
  std::uint64_t size(std::uint64_t t) const;

  /// Largest batch index this schedule can produce.
  std::uint64_t max_batch() const;

  std::string to_string() const;

private:
  BatchSchedule() = default;

  Kind kind_ = Kind::polynomial;
  unsigned exponent_ = 5;
  std::uint64_t poly_max_t_ = 0;
  std::vector<std::uint64_t> bounds_;
};

} // namespace mdstop
