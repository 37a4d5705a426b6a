#include "mdstop/schedule.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mdstop {

namespace {

// Largest t with t^exponent representable in uint64; floating-point
// estimate corrected by exact integer checks.
std::uint64_t poly_max_index(unsigned exponent) {
  if (exponent == 1) return std::numeric_limits<std::uint64_t>::max();
  const auto fits = [exponent](std::uint64_t base) {
    std::uint64_t p = 1;
    for (unsigned i = 0; i < exponent; ++i) {
      if (base != 0 && p > std::numeric_limits<std::uint64_t>::max() / base)
        return false;
      p *= base;
    }
    return true;
  };
  std::uint64_t t =
      static_cast<std::uint64_t>(std::pow(2.0, 64.0 / static_cast<double>(exponent)));
  while (t > 1 && !fits(t)) --t;
  while (fits(t + 1)) ++t;
  return t;
}

std::uint64_t ipow(std::uint64_t base, unsigned exponent) {
  std::uint64_t p = 1;
  for (unsigned i = 0; i < exponent; ++i) p *= base;
  return p;
}

std::uint64_t parse_u64(std::string_view s, const char* what) {
  std::uint64_t value = 0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last)
    throw std::invalid_argument(std::string("schedule: bad ") + what + " '" +
                                std::string(s) + "'");
  return value;
}

} // namespace

BatchSchedule BatchSchedule::polynomial(unsigned exponent) {
  if (exponent < 1)
    throw std::invalid_argument("schedule: polynomial exponent must be >= 1");
  BatchSchedule s;
  s.kind_ = Kind::polynomial;
  s.exponent_ = exponent;
  s.poly_max_t_ = poly_max_index(exponent);
  return s;
}

BatchSchedule BatchSchedule::explicit_list(std::vector<std::uint64_t> bounds) {
  if (bounds.empty())
    throw std::invalid_argument("schedule: explicit list must be non-empty");
  std::uint64_t prev = 0;
  for (std::uint64_t b : bounds) {
    if (b <= prev)
      throw std::invalid_argument(
          "schedule: explicit bounds must be strictly increasing and positive");
    prev = b;
  }
  BatchSchedule s;
  s.kind_ = Kind::explicit_list;
  s.bounds_ = std::move(bounds);
  return s;
}

BatchSchedule BatchSchedule::parse(std::string_view spec) {
  if (spec.rfind("poly:", 0) == 0) {
    const std::uint64_t e = parse_u64(spec.substr(5), "exponent");
    if (e == 0 || e > 63)
      throw std::invalid_argument("schedule: exponent out of range");
    return polynomial(static_cast<unsigned>(e));
  }
  if (spec.rfind("explicit:", 0) == 0) {
    std::vector<std::uint64_t> bounds;
    std::string_view rest = spec.substr(9);
    while (!rest.empty()) {
      const std::size_t comma = rest.find(',');
      const std::string_view item =
          comma == std::string_view::npos ? rest : rest.substr(0, comma);
      bounds.push_back(parse_u64(item, "bound"));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
      if (rest.empty())
        throw std::invalid_argument("schedule: trailing comma in explicit list");
    }
    return explicit_list(std::move(bounds));
  }
  throw std::invalid_argument("schedule: expected 'poly:<k>' or 'explicit:<list>', got '" +
                              std::string(spec) + "'");
}

std::uint64_t BatchSchedule::bound(std::uint64_t t) const {
  if (t == 0) return 0;
  if (kind_ == Kind::polynomial) {
    if (t > poly_max_t_)
      throw std::overflow_error("schedule: t^" + std::to_string(exponent_) +
                                " overflows 64 bits at t=" + std::to_string(t) +
                                " (max " + std::to_string(poly_max_t_) + ")");
    return ipow(t, exponent_);
  }
  if (t > bounds_.size())
    throw std::out_of_range("schedule: batch index " + std::to_string(t) +
                            " beyond explicit list of length " +
                            std::to_string(bounds_.size()));
  return bounds_[t - 1];
}

std::uint64_t BatchSchedule::size(std::uint64_t t) const {
  if (t == 0)
    throw std::invalid_argument("schedule: batch size undefined for t=0");
  return bound(t) - bound(t - 1);
}

std::uint64_t BatchSchedule::max_batch() const {
  return kind_ == Kind::polynomial ? poly_max_t_ : bounds_.size();
}

std::string BatchSchedule::to_string() const {
  if (kind_ == Kind::polynomial) return "poly:" + std::to_string(exponent_);
  std::string out = "explicit:";
  for (std::size_t i = 0; i < bounds_.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(bounds_[i]);
  }
  return out;
}

} // namespace mdstop
