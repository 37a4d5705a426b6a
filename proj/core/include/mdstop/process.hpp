// process.hpp
//
// Branchable stochastic sequence generators. A ProcessModel produces one
// sample at a time from a caller-owned random stream and can be
// checkpointed at batch boundaries and later branched: restoring a
// boundary checkpoint on a copy and feeding it a fresh stream yields a
// resampled batch that continues the original past but is conditionally
// independent of the original batch generated from the same boundary.
//
// The engine-facing interface deliberately excludes the exact mean of the
// process; evaluation code gets it from the ModelFactory instead, so a
// stopping rule can never peek at the quantity it is estimating.
#pragma once

#include "mdstop/rng.hpp"
#include "mdstop/schedule.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mdstop {

enum class ModelKind { iid, arch1, control_variate };

struct SampleDraw {
  double value = 0.0;
  /// Var(value | past), when the model knows it in closed form.
  std::optional<double> cond_var;
};

/// Opaque snapshot of a model's mutable state, tagged with the model kind
/// so a foreign snapshot is rejected on restore.
struct ModelState {
  ModelKind kind{};
  std::vector<double> payload;
};

/// Per-batch summary handed to the model after a batch completes, before
/// the next one begins.
struct BatchStats {
  std::uint64_t t = 0;
  std::uint64_t batch_size = 0;
  double mean = 0.0;
};

class ProcessModel {
public:
  virtual ~ProcessModel() = default;

  virtual ModelKind kind() const = 0;
  virtual SampleDraw next_sample(RngStream& stream) = 0;
  virtual ModelState checkpoint() const = 0;
  virtual void restore(const ModelState& state) = 0;

  /// Parameter updates that happen once per batch (e.g. the control
  /// variate coefficient). Default: nothing.
  virtual void on_batch_end(const BatchStats&) {}

  /// Whether next_sample always carries a conditional-variance term.
  virtual bool emits_cond_var() const = 0;

  /// Average over batch t of the per-sample unconditional variances, when
  /// the model admits a closed form; absent otherwise.
  virtual std::optional<double>
  theoretical_batch_variance(const BatchSchedule& schedule, std::uint64_t t) const = 0;

  virtual std::unique_ptr<ProcessModel> clone() const = 0;

  /// Round-trippable config string ("arch1:0.03:0.3:6", ...).
  virtual std::string config_string() const = 0;

protected:
  void check_state(const ModelState& state) const;
};

// ---------------------------------------------------------------------------
// iid baseline: normal(mean, variance) or a shifted/scaled uniform with the
// same two moments.

class IidModel final : public ProcessModel {
public:
  enum class Law { normal, uniform };

  IidModel(Law law, double mean, double variance);

  ModelKind kind() const override { return ModelKind::iid; }
  SampleDraw next_sample(RngStream& stream) override;
  ModelState checkpoint() const override;
  void restore(const ModelState& state) override;
  bool emits_cond_var() const override { return true; }
  std::optional<double> theoretical_batch_variance(const BatchSchedule&,
                                                   std::uint64_t t) const override;
  std::unique_ptr<ProcessModel> clone() const override;
  std::string config_string() const override;

  double true_mean() const { return mean_; }

private:
  Law law_;
  double mean_;
  double variance_;
  double half_width_; // uniform law: sqrt(12 var)/2
};

// ---------------------------------------------------------------------------
// ARCH(1): X_k = sqrt(beta + alpha X_{k-1}^2) V_k with X_0 = 0 and V_k
// unit-variance scaled-t innovations.

class Arch1Model final : public ProcessModel {
public:
  /// Requires alpha in (0,1), beta > 0, dof >= 5, and the fourth-moment
  /// stability condition 3 alpha^2 (dof-2)/(dof-4) < 1.
  Arch1Model(double alpha, double beta, unsigned dof);

  ModelKind kind() const override { return ModelKind::arch1; }
  SampleDraw next_sample(RngStream& stream) override;
  ModelState checkpoint() const override;
  void restore(const ModelState& state) override;
  bool emits_cond_var() const override { return true; }
  std::optional<double> theoretical_batch_variance(const BatchSchedule& schedule,
                                                   std::uint64_t t) const override;
  std::unique_ptr<ProcessModel> clone() const override;
  std::string config_string() const override;

  double true_mean() const { return 0.0; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  unsigned dof() const { return dof_; }

  /// Limit of Var(X_k): beta/(1-alpha).
  double stationary_variance() const { return beta_ / (1.0 - alpha_); }

  /// Limit of E[X_k^4] under the stability condition:
  /// 3 beta^2 (1+alpha)(dof-2) / ((1-alpha)(dof-4-3 alpha^2 (dof-2))).
  double fourth_moment_limit() const;

  /// Stability margin 3 alpha^2 (dof-2)/(dof-4); must be < 1.
  static double stability_value(double alpha, unsigned dof);

private:
  double alpha_;
  double beta_;
  unsigned dof_;
  double lag_ = 0.0; // X_{k-1}
};

// ---------------------------------------------------------------------------
// Adaptive control variates on the unit interval: X_k = psi(U_k) +
// theta(t-1) (U_k - 1/2), with theta re-fit once per batch from that
// batch's own draws: theta(t) = -12 mean_k[ psi(U_k) (U_k - 1/2) ].

class Integrand {
public:
  /// Built-in by name; currently "usq_half" (psi(u) = u^2/2).
  static Integrand builtin(std::string_view name);

  /// Polynomial with ascending coefficients: c0 + c1 u + c2 u^2 + ...
  static Integrand polynomial(std::vector<double> coefficients);

  double operator()(double u) const;

  /// Exact moments on (0,1): integral of psi, of psi^2, and the optimal
  /// control-variate coefficient -12 * integral of psi(u)(u - 1/2).
  double integral() const;
  double second_moment() const;
  double optimal_coefficient() const;

  const std::string& name() const { return name_; }
  const std::vector<double>& coefficients() const { return coeffs_; }

private:
  Integrand() = default;
  std::string name_;
  std::vector<double> coeffs_; // ascending powers
};

class ControlVariateModel final : public ProcessModel {
public:
  /// adapt=false freezes theta at 0 (crude Monte Carlo), used as the
  /// baseline the adaptive estimator is compared against.
  explicit ControlVariateModel(Integrand psi, bool adapt = true);

  ModelKind kind() const override { return ModelKind::control_variate; }
  SampleDraw next_sample(RngStream& stream) override;
  ModelState checkpoint() const override;
  void restore(const ModelState& state) override;
  void on_batch_end(const BatchStats& stats) override;
  bool emits_cond_var() const override { return true; }
  std::optional<double> theoretical_batch_variance(const BatchSchedule&,
                                                   std::uint64_t) const override {
    return std::nullopt; // depends on the law of the random theta path
  }
  std::unique_ptr<ProcessModel> clone() const override;
  std::string config_string() const override;

  double true_mean() const { return psi_.integral(); }
  double theta() const { return theta_; }
  const Integrand& integrand() const { return psi_; }
  unsigned dimension() const { return 1; }

  /// Estimator variance at a fixed coefficient: V(theta) - mu^2 with
  /// V(theta) = V(0) - theta theta*/6 + theta^2/12.
  double variance_at(double theta_value) const;

private:
  Integrand psi_;
  bool adapt_;
  double mu_;         // integral of psi
  double v0_;         // second moment of psi
  double theta_star_; // optimal coefficient
  double theta_ = 0.0;
  double pending_sum_ = 0.0; // running sum of psi(U)(U-1/2) in current batch
  std::uint64_t pending_n_ = 0;
};

// ---------------------------------------------------------------------------
// Model construction from config strings.

struct ModelFactory {
  std::function<std::unique_ptr<ProcessModel>()> make;
  double true_mean = 0.0; // evaluation-side knowledge, never given to the engine
  std::string spec;
};

/// Parses "iid:normal:<mean>:<var>", "iid:uniform:<mean>:<var>",
/// "arch1:<alpha>:<beta>:<dof>", "cv:usq_half[:crude]",
/// "cv:poly:<c0,c1,...>[:crude]". Throws std::invalid_argument on bad specs.
ModelFactory parse_model(std::string_view spec);

/// Mean of a fresh batch drawn by a copy of `model` restored to
/// `at_boundary` (a checkpoint taken at the end of batch tau-1), using a
/// stream never touched by the original path. The model itself is left
/// untouched. Throws std::invalid_argument on a checkpoint kind mismatch.
double branch_for_resample(const ProcessModel& model, const ModelState& at_boundary,
                           RngStream& branch_stream, std::uint64_t batch_len);

} // namespace mdstop
