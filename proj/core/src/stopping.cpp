#include "mdstop/stopping.hpp"

#include "mdstop/accumulator.hpp"
#include "mdstop/normal.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mdstop {

// ---------------------------------------------------------------------------
// Inflation

Inflation Inflation::custom(std::vector<double> values) {
  Inflation a{Kind::custom, std::move(values)};
  a.validate();
  return a;
}

void Inflation::validate() const {
  if (kind != Kind::custom) return;
  if (table.empty())
    throw std::invalid_argument("inflation: custom table must be non-empty");
  double prev = std::numeric_limits<double>::infinity();
  for (double v : table) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("inflation: custom values must be positive and finite");
    if (v > prev)
      throw std::invalid_argument("inflation: custom values must be nonincreasing");
    prev = v;
  }
}

double Inflation::at(std::uint64_t t) const {
  if (t < 1) throw std::invalid_argument("inflation: t must be >= 1");
  switch (kind) {
    case Kind::inv_t: return 1.0 / static_cast<double>(t);
    case Kind::none: return 0.0;
    case Kind::custom: {
      const std::size_t i = t <= table.size() ? static_cast<std::size_t>(t - 1)
                                              : table.size() - 1;
      return table[i];
    }
  }
  throw std::logic_error("inflation: unreachable");
}

// ---------------------------------------------------------------------------
// StoppingConfig

void StoppingConfig::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw std::invalid_argument("stopping: epsilon must be positive and finite");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("stopping: delta must lie in (0,1)");
  if (t_max < 1)
    throw std::invalid_argument("stopping: t_max must be >= 1");
  if (min_batch < 1)
    throw std::invalid_argument("stopping: min_batch must be >= 1");
  inflation.validate();
}

// ---------------------------------------------------------------------------
// Criterion

double criterion_probability(double epsilon, double batch_size, double v, double a_t) {
  if (!(epsilon > 0.0))
    throw std::domain_error("criterion: epsilon must be > 0");
  if (!(batch_size >= 1.0))
    throw std::domain_error("criterion: batch size must be >= 1");
  if (!(v >= 0.0) || !(a_t >= 0.0))
    throw std::domain_error("criterion: v and a(t) must be >= 0");
  const double denom = v + a_t;
  if (denom == 0.0)
    throw std::domain_error("criterion: v + a(t) must be > 0");
  return 2.0 * (1.0 - normal_cdf(epsilon * std::sqrt(batch_size) / denom));
}

namespace {

// criterion_probability with the degenerate v + a == 0 case taken at its
// limit (argument +inf, probability 0) so that a variance-free process can
// still fire.
double criterion_saturated(double epsilon, double batch_size, double v, double a_t) {
  if (v + a_t == 0.0) return 0.0;
  return criterion_probability(epsilon, batch_size, v, a_t);
}

} // namespace

CriterionEval evaluate_criterion(const StoppingConfig& cfg, const BatchObservation& obs) {
  CriterionEval eval;
  eval.criterion = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> var_sq;
  switch (cfg.variance_kind) {
    case VarianceKind::empirical:
      var_sq = obs.var_empirical;
      if (!var_sq) return eval; // single-sample batch: rule cannot fire
      break;
    case VarianceKind::conditional:
      var_sq = obs.var_conditional;
      if (!var_sq)
        throw std::invalid_argument(
            "stopping: conditional variance requested but not provided by the model");
      break;
    case VarianceKind::theoretical:
      var_sq = obs.var_theoretical;
      if (!var_sq)
        throw std::invalid_argument(
            "stopping: theoretical variance requested but not available for the model");
      break;
  }
  eval.defined = true;
  eval.v = std::sqrt(std::max(0.0, *var_sq));
  eval.a = cfg.inflation.at(obs.t);
  eval.criterion = criterion_saturated(cfg.epsilon, static_cast<double>(obs.batch_size),
                                       eval.v, eval.a);
  return eval;
}

bool should_stop(const StoppingConfig& cfg, const BatchObservation& obs) {
  const CriterionEval eval = evaluate_criterion(cfg, obs);
  return eval.defined && obs.t >= cfg.min_batch && eval.criterion <= cfg.delta;
}

// ---------------------------------------------------------------------------
// Engine

namespace {

void check_model_compat(const StoppingConfig& cfg, const ProcessModel& model,
                        const BatchSchedule& schedule) {
  if (cfg.variance_kind == VarianceKind::conditional && !model.emits_cond_var())
    throw std::invalid_argument(
        "stopping: conditional variance requested but the model does not emit it");
  if (cfg.variance_kind == VarianceKind::theoretical &&
      !model.theoretical_batch_variance(schedule, 1).has_value())
    throw std::invalid_argument(
        "stopping: theoretical variance requested but the model has no closed form");
}

BatchObservation observe_batch(const ProcessModel& model, const BatchSchedule& schedule,
                               std::uint64_t t, const BatchAccumulator& acc) {
  BatchObservation obs;
  obs.t = t;
  obs.batch_size = acc.count();
  obs.mean = acc.mean();
  if (acc.count() >= 2) obs.var_empirical = acc.variance_unbiased();
  if (acc.has_cond_var()) obs.var_conditional = acc.cond_var_mean();
  obs.var_theoretical = model.theoretical_batch_variance(schedule, t);
  return obs;
}

} // namespace

StoppingOutcome run_stopping(ProcessModel& model, const BatchSchedule& schedule,
                             const StoppingConfig& cfg, RngStream& primary,
                             RngStream& branch) {
  cfg.validate();
  check_model_compat(cfg, model, schedule);

  for (std::uint64_t t = 1;; ++t) {
    const ModelState boundary = model.checkpoint(); // state at m(t-1)
    const std::uint64_t batch_len = schedule.size(t);
    BatchAccumulator acc;
    for (std::uint64_t i = 0; i < batch_len; ++i) {
      const SampleDraw d = model.next_sample(primary);
      if (d.cond_var)
        acc.add(d.value, *d.cond_var);
      else
        acc.add(d.value);
    }
    const BatchObservation obs = observe_batch(model, schedule, t, acc);
    model.on_batch_end({t, batch_len, obs.mean});

    const CriterionEval eval = evaluate_criterion(cfg, obs);
    const bool fired = eval.defined && t >= cfg.min_batch && eval.criterion <= cfg.delta;
    if (fired || t >= cfg.t_max) {
      StoppingOutcome out;
      out.tau = t;
      out.mu_star = branch_for_resample(model, boundary, branch, batch_len);
      out.mu_at_stop = obs.mean;
      out.v_at_stop = eval.defined ? eval.v : std::numeric_limits<double>::quiet_NaN();
      out.criterion_at_stop = eval.criterion;
      out.total_samples = schedule.bound(t) + batch_len;
      out.hit_cap = !fired;
      return out;
    }
  }
}

std::vector<TraceRow> trace_batches(ProcessModel& model, const BatchSchedule& schedule,
                                    const StoppingConfig& cfg, RngStream& primary,
                                    std::uint64_t horizon) {
  cfg.validate();
  check_model_compat(cfg, model, schedule);
  if (horizon < 1)
    throw std::invalid_argument("trace: horizon must be >= 1");

  std::vector<TraceRow> rows;
  rows.reserve(horizon);
  for (std::uint64_t t = 1; t <= horizon; ++t) {
    const std::uint64_t batch_len = schedule.size(t);
    BatchAccumulator acc;
    for (std::uint64_t i = 0; i < batch_len; ++i) {
      const SampleDraw d = model.next_sample(primary);
      if (d.cond_var)
        acc.add(d.value, *d.cond_var);
      else
        acc.add(d.value);
    }
    const BatchObservation obs = observe_batch(model, schedule, t, acc);
    model.on_batch_end({t, batch_len, obs.mean});

    TraceRow row;
    row.t = t;
    row.batch_size = batch_len;
    row.mean = obs.mean;
    row.v0_sq = obs.var_theoretical;
    row.v1_sq = obs.var_conditional;
    row.v2_sq = obs.var_empirical;
    const CriterionEval eval = evaluate_criterion(cfg, obs);
    if (eval.defined) row.criterion = eval.criterion;
    rows.push_back(row);
  }
  return rows;
}

} // namespace mdstop
