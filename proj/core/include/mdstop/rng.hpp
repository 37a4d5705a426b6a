// rng.hpp
//
// Seeded, keyed random streams. Every logical stream is addressed by a
// 64-bit base seed plus a StreamId; equal (seed, id) pairs reproduce the
// same draws bit for bit, distinct ids give statistically independent
// streams. The branch flag separates the fresh randomness used for a
// resampled batch from the primary path of the same run.
#pragma once

#include <cstdint>
#include <random>

namespace mdstop {

/// Stream purposes; any uint32 works, these are the ones the library uses.
enum class StreamPurpose : std::uint32_t {
  single_run = 1,
  trace = 2,
  evaluate = 3,
  verify = 4,
};

struct StreamId {
  std::uint32_t purpose = 0;
  std::uint64_t grid_index = 0;
  std::uint64_t run_index = 0;
  bool branch = false;
};

class RngStream {
public:
  RngStream(std::uint64_t base_seed, const StreamId& id);

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform draw strictly inside (0,1), 53-bit resolution.
  double uniform01();

  /// Standard normal via inverse-CDF transform (one uniform per draw;
  /// platform-independent given the same stream).
  double normal();

  /// Chi-square with integer dof >= 1, from exponential spacings plus at
  /// most one squared normal for odd dof.
  double chi_square(unsigned dof);

  /// Student-t with dof >= 5, scaled by sqrt((dof-2)/dof) so the draw has
  /// zero mean and unit variance. Fourth moment is 3(dof-2)/(dof-4).
  /// Throws std::invalid_argument for dof < 5.
  double scaled_t(unsigned dof);

private:
  std::mt19937_64 gen_;
};

} // namespace mdstop
