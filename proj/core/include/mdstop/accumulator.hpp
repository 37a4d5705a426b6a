// accumulator.hpp
//
// Single-pass batch statistics: mean, centered second moment (Welford
// update), and an optional running sum of per-sample conditional
// variances. Batches reach ~1e7 samples, so the update must stay stable
// without a second pass.
#pragma once

#include <cstdint>
#include <stdexcept>

namespace mdstop {

class BatchAccumulator {
public:
  void add(double x) {
    ++n_;
    sum_ += x;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
    has_cond_var_ = false;
  }

  void add(double x, double cond_var) {
    ++n_;
    sum_ += x;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
    cond_var_sum_ += cond_var;
  }

  std::uint64_t count() const { return n_; }

  double mean() const {
    if (n_ < 1) throw std::logic_error("BatchAccumulator: mean of empty batch");
    return sum_ / static_cast<double>(n_);
  }

  /// Divisor n-1 form; requires at least two samples.
  double variance_unbiased() const {
    if (n_ < 2)
      throw std::logic_error("BatchAccumulator: variance needs >= 2 samples");
    return m2_ / static_cast<double>(n_ - 1);
  }

  /// Divisor n form (second moment about the mean); diagnostic only.
  double variance_biased() const {
    if (n_ < 2)
      throw std::logic_error("BatchAccumulator: variance needs >= 2 samples");
    return m2_ / static_cast<double>(n_);
  }

  /// True when every sample carried a conditional-variance term.
  bool has_cond_var() const { return has_cond_var_ && n_ > 0; }

  /// Batch average of the per-sample conditional variances.
  double cond_var_mean() const {
    if (!has_cond_var())
      throw std::logic_error("BatchAccumulator: no conditional-variance terms");
    return cond_var_sum_ / static_cast<double>(n_);
  }

private:
  std::uint64_t n_ = 0;
  double sum_ = 0.0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  double cond_var_sum_ = 0.0;
  bool has_cond_var_ = true;
};

} // namespace mdstop
