#include "mdstop/rng.hpp"

#include "mdstop/normal.hpp"

#include <cmath>
#include <stdexcept>

namespace mdstop {

namespace {

// splitmix64 finalizer; scatters the id tuple into well-separated seeds.
std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::mt19937_64 make_engine(std::uint64_t base_seed, const StreamId& id) {
  std::uint64_t h = mix64(base_seed);
  h = mix64(h ^ (0x100000000ULL + id.purpose));
  h = mix64(h ^ id.grid_index);
  h = mix64(h ^ id.run_index);
  h = mix64(h ^ (id.branch ? 0x8000000000000000ULL : 0ULL));
  std::seed_seq seq{
      static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32),
      static_cast<std::uint32_t>(mix64(h)), static_cast<std::uint32_t>(mix64(h) >> 32),
      static_cast<std::uint32_t>(mix64(h + 1)), static_cast<std::uint32_t>(mix64(h + 1) >> 32),
      static_cast<std::uint32_t>(mix64(h + 2)), static_cast<std::uint32_t>(mix64(h + 2) >> 32)};
  return std::mt19937_64(seq);
}

} // namespace

RngStream::RngStream(std::uint64_t base_seed, const StreamId& id)
    : gen_(make_engine(base_seed, id)) {}

double RngStream::uniform01() {
  return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() { return normal_quantile(uniform01()); }

double RngStream::chi_square(unsigned dof) {
  if (dof < 1) throw std::invalid_argument("chi_square: dof must be >= 1");
  double sum = 0.0;
  double prod = 1.0;
  for (unsigned i = 0; i < dof / 2; ++i) {
    prod *= uniform01();
    if (prod < 1e-280) { // flush before the product underflows
      sum += -2.0 * std::log(prod);
      prod = 1.0;
    }
  }
  sum += -2.0 * std::log(prod);
  if (dof % 2 == 1) {
    const double z = normal();
    sum += z * z;
  }
  return sum;
}

double RngStream::scaled_t(unsigned dof) {
  if (dof < 5)
    throw std::invalid_argument("scaled_t: dof must be >= 5 (finite fourth moment)");
  const double z = normal();
  const double y = chi_square(dof);
  return z * std::sqrt(static_cast<double>(dof - 2) / y);
}

} // namespace mdstop
