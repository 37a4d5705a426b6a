// stopping.hpp
//
// Sequential stopping engine. Per batch t it computes the two-sided
// normal tail probability 2(1 - Phi(eps sqrt(|M(t)|)/(v(t) + a(t)))) from
// a configurable standard-deviation estimate v(t) and inflation a(t), and
// stops at the first batch where that probability drops to the error
// budget delta. The reported estimate is the mean of a resampled batch
// branched from the state at the previous batch boundary, which keeps the
// output unbiased where the stopped original batch mean need not be.
#pragma once

#include "mdstop/process.hpp"
#include "mdstop/rng.hpp"
#include "mdstop/schedule.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace mdstop {

enum class VarianceKind {
  empirical,   // v2: divisor-(n-1) sample variance of the batch
  conditional, // v1: batch average of per-sample conditional variances
  theoretical, // v0: closed-form batch variance, diagnostic only
};

struct Inflation {
  enum class Kind { inv_t, none, custom };

  Kind kind = Kind::inv_t;
  /// Custom table a(1), a(2), ...; must be strictly positive and
  /// nonincreasing. Batches past the end reuse the last entry.
  std::vector<double> table;

  static Inflation inv_t() { return {Kind::inv_t, {}}; }
  static Inflation none() { return {Kind::none, {}}; }
  static Inflation custom(std::vector<double> values);

  double at(std::uint64_t t) const;
  void validate() const;
};

struct StoppingConfig {
  double epsilon = 0.0;                // precision, > 0
  double delta = 0.0;                  // error probability, in (0,1)
  VarianceKind variance_kind = VarianceKind::empirical;
  Inflation inflation = Inflation::inv_t();
  std::uint64_t t_max = 64;            // hard cap on batch count
  std::uint64_t min_batch = 1;         // first batch eligible to stop

  void validate() const; // throws std::invalid_argument
};

struct StoppingOutcome {
  std::uint64_t tau = 0;        // stopping batch index
  double mu_star = 0.0;         // resampled batch mean (the output)
  double mu_at_stop = 0.0;      // original batch mean at tau, diagnostic
  double v_at_stop = 0.0;       // std-dev estimate fed to the criterion at tau
  double criterion_at_stop = 0; // left side 2(1 - Phi(...)) at tau
  std::uint64_t total_samples = 0; // m(tau) originals + |M(tau)| resampled
  bool hit_cap = false;         // criterion never fired within t_max
};

/// Two-sided tail probability 2(1 - Phi(epsilon sqrt(batch_size)/(v + a_t))).
/// Strictly decreasing in batch_size, increasing in v. Requires epsilon > 0,
/// batch_size >= 1 and v + a_t > 0 (std::domain_error otherwise).
double criterion_probability(double epsilon, double batch_size, double v, double a_t);

/// What the engine knows about one original batch when it decides.
struct BatchObservation {
  std::uint64_t t = 0;
  std::uint64_t batch_size = 0;
  double mean = 0.0;
  std::optional<double> var_empirical;   // absent when batch_size < 2
  std::optional<double> var_conditional; // absent unless the model emits it
  std::optional<double> var_theoretical; // absent unless closed form exists
};

struct CriterionEval {
  bool defined = false;    // variance of the configured kind was available
  double v = 0.0;          // std-dev estimate used
  double a = 0.0;          // inflation value used
  double criterion = 0.0;  // NaN when !defined
};

/// Evaluates the configured criterion on one batch. An unavailable
/// empirical variance (single-sample batch) leaves the criterion
/// undefined: the rule cannot fire there. An unavailable conditional or
/// theoretical variance is a config/model mismatch and throws.
CriterionEval evaluate_criterion(const StoppingConfig& cfg, const BatchObservation& obs);

/// True iff the criterion is defined, t >= min_batch, and the tail
/// probability is <= delta (inclusive at equality).
bool should_stop(const StoppingConfig& cfg, const BatchObservation& obs);

/// Runs the full loop on a fresh model: per batch, snapshot the state at
/// the boundary, generate the batch, update the model, and test the
/// criterion; at the stop (or at t_max, flagged hit_cap) produce the
/// resampled mean by branching from the boundary snapshot with the branch
/// stream. Deterministic given (model, config, streams).
StoppingOutcome run_stopping(ProcessModel& model, const BatchSchedule& schedule,
                             const StoppingConfig& cfg, RngStream& primary,
                             RngStream& branch);

/// One batch of the per-batch series emitted by trace_batches.
struct TraceRow {
  std::uint64_t t = 0;
  std::uint64_t batch_size = 0;
  double mean = 0.0;
  std::optional<double> v0_sq; // theoretical batch variance
  std::optional<double> v1_sq; // conditional batch variance
  std::optional<double> v2_sq; // empirical batch variance
  std::optional<double> criterion; // configured kind; absent if undefined
};

/// Generates `horizon` batches without stopping and reports the variance
/// hierarchy and criterion value per batch.
std::vector<TraceRow> trace_batches(ProcessModel& model, const BatchSchedule& schedule,
                                    const StoppingConfig& cfg, RngStream& primary,
                                    std::uint64_t horizon);

} // namespace mdstop
