#include "mdstop/process.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace mdstop {

namespace {

double parse_double(std::string_view s, const char* what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(std::string(s), &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string("model: bad ") + what + " '" +
                                std::string(s) + "'");
  }
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  while (true) {
    const std::size_t pos = s.find(sep);
    out.push_back(s.substr(0, pos));
    if (pos == std::string_view::npos) break;
    s.remove_prefix(pos + 1);
  }
  return out;
}

// Shortest decimal form that parses back to the same double.
std::string format_double(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

} // namespace

void ProcessModel::check_state(const ModelState& state) const {
  if (state.kind != kind())
    throw std::invalid_argument("restore: checkpoint belongs to a different model kind");
}

// ---------------------------------------------------------------------------
// IidModel

IidModel::IidModel(Law law, double mean, double variance)
    : law_(law), mean_(mean), variance_(variance),
      half_width_(std::sqrt(3.0 * variance)) {
  if (!(variance >= 0.0) || !std::isfinite(variance) || !std::isfinite(mean))
    throw std::invalid_argument("iid model: variance must be finite and >= 0");
}

SampleDraw IidModel::next_sample(RngStream& stream) {
  double x;
  if (law_ == Law::normal) {
    x = mean_ + std::sqrt(variance_) * stream.normal();
  } else {
    x = mean_ + 2.0 * half_width_ * (stream.uniform01() - 0.5);
  }
  return {x, variance_};
}

ModelState IidModel::checkpoint() const { return {ModelKind::iid, {}}; }

void IidModel::restore(const ModelState& state) { check_state(state); }

std::optional<double> IidModel::theoretical_batch_variance(const BatchSchedule&,
                                                           std::uint64_t t) const {
  if (t < 1) throw std::invalid_argument("theoretical_batch_variance: t must be >= 1");
  return variance_;
}

std::unique_ptr<ProcessModel> IidModel::clone() const {
  return std::make_unique<IidModel>(*this);
}

std::string IidModel::config_string() const {
  return std::string("iid:") + (law_ == Law::normal ? "normal" : "uniform") + ":" +
         format_double(mean_) + ":" + format_double(variance_);
}

// ---------------------------------------------------------------------------
// Arch1Model

double Arch1Model::stability_value(double alpha, unsigned dof) {
  return 3.0 * alpha * alpha * static_cast<double>(dof - 2) /
         static_cast<double>(dof - 4);
}

Arch1Model::Arch1Model(double alpha, double beta, unsigned dof)
    : alpha_(alpha), beta_(beta), dof_(dof) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("arch1: alpha must lie in (0,1)");
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw std::invalid_argument("arch1: beta must be positive and finite");
  if (dof < 5)
    throw std::invalid_argument("arch1: dof must be >= 5");
  if (!(stability_value(alpha, dof) < 1.0))
    throw std::invalid_argument("arch1: fourth-moment stability violated, need "
                                "3 alpha^2 (dof-2)/(dof-4) < 1");
}

SampleDraw Arch1Model::next_sample(RngStream& stream) {
  const double cond_var = beta_ + alpha_ * lag_ * lag_;
  const double x = std::sqrt(cond_var) * stream.scaled_t(dof_);
  lag_ = x;
  return {x, cond_var};
}

ModelState Arch1Model::checkpoint() const { return {ModelKind::arch1, {lag_}}; }

void Arch1Model::restore(const ModelState& state) {
  check_state(state);
  if (state.payload.size() != 1)
    throw std::invalid_argument("arch1: malformed checkpoint payload");
  lag_ = state.payload[0];
}

std::optional<double>
Arch1Model::theoretical_batch_variance(const BatchSchedule& schedule,
                                       std::uint64_t t) const {
  if (t < 1) throw std::invalid_argument("theoretical_batch_variance: t must be >= 1");
  // Average of Var(X_k) = beta (1-alpha^k)/(1-alpha) over k in batch t;
  // the geometric sum over k = m(t-1)+1 .. m(t) is taken in closed form.
  const std::uint64_t lo = schedule.bound(t - 1) + 1;
  const std::uint64_t hi = schedule.bound(t);
  const double count = static_cast<double>(hi - lo + 1);
  const double geo_sum =
      (std::pow(alpha_, static_cast<double>(lo)) -
       std::pow(alpha_, static_cast<double>(hi) + 1.0)) /
      (1.0 - alpha_);
  return stationary_variance() * (1.0 - geo_sum / count);
}

double Arch1Model::fourth_moment_limit() const {
  const double n = static_cast<double>(dof_);
  return 3.0 * beta_ * beta_ * (1.0 + alpha_) * (n - 2.0) /
         ((1.0 - alpha_) * (n - 4.0 - 3.0 * alpha_ * alpha_ * (n - 2.0)));
}

std::unique_ptr<ProcessModel> Arch1Model::clone() const {
  return std::make_unique<Arch1Model>(*this);
}

std::string Arch1Model::config_string() const {
  return "arch1:" + format_double(alpha_) + ":" + format_double(beta_) + ":" +
         std::to_string(dof_);
}

// ---------------------------------------------------------------------------
// Integrand

Integrand Integrand::builtin(std::string_view name) {
  if (name == "usq_half") {
    Integrand psi;
    psi.name_ = "usq_half";
    psi.coeffs_ = {0.0, 0.0, 0.5}; // u^2/2
    return psi;
  }
  throw std::invalid_argument("integrand: unknown builtin '" + std::string(name) + "'");
}

Integrand Integrand::polynomial(std::vector<double> coefficients) {
  if (coefficients.empty())
    throw std::invalid_argument("integrand: empty coefficient list");
  for (double c : coefficients)
    if (!std::isfinite(c))
      throw std::invalid_argument("integrand: coefficients must be finite");
  Integrand psi;
  psi.name_ = "poly";
  psi.coeffs_ = std::move(coefficients);
  return psi;
}

double Integrand::operator()(double u) const {
  double acc = 0.0;
  for (std::size_t i = coeffs_.size(); i-- > 0;) acc = acc * u + coeffs_[i];
  return acc;
}

double Integrand::integral() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < coeffs_.size(); ++i)
    acc += coeffs_[i] / static_cast<double>(i + 1);
  return acc;
}

double Integrand::second_moment() const {
  // integral of (sum c_i u^i)^2 = sum_{i,j} c_i c_j / (i+j+1)
  double acc = 0.0;
  for (std::size_t i = 0; i < coeffs_.size(); ++i)
    for (std::size_t j = 0; j < coeffs_.size(); ++j)
      acc += coeffs_[i] * coeffs_[j] / static_cast<double>(i + j + 1);
  return acc;
}

double Integrand::optimal_coefficient() const {
  // -12 * integral of psi(u)(u - 1/2)
  //     = -12 * sum_i c_i (1/(i+2) - 1/(2(i+1)))
  double acc = 0.0;
  for (std::size_t i = 0; i < coeffs_.size(); ++i)
    acc += coeffs_[i] * (1.0 / static_cast<double>(i + 2) -
                         0.5 / static_cast<double>(i + 1));
  return -12.0 * acc;
}

// ---------------------------------------------------------------------------
// ControlVariateModel

ControlVariateModel::ControlVariateModel(Integrand psi, bool adapt)
    : psi_(std::move(psi)), adapt_(adapt), mu_(psi_.integral()),
      v0_(psi_.second_moment()), theta_star_(psi_.optimal_coefficient()) {}

double ControlVariateModel::variance_at(double theta_value) const {
  // V(theta) = V(0) + 2 theta * I1 + theta^2/12 with I1 = -theta*/12.
  const double v_theta =
      v0_ - theta_value * theta_star_ / 6.0 + theta_value * theta_value / 12.0;
  return v_theta - mu_ * mu_;
}

SampleDraw ControlVariateModel::next_sample(RngStream& stream) {
  const double u = stream.uniform01();
  const double centered = u - 0.5;
  const double psi_u = psi_(u);
  pending_sum_ += psi_u * centered;
  ++pending_n_;
  return {psi_u + theta_ * centered, variance_at(theta_)};
}

ModelState ControlVariateModel::checkpoint() const {
  return {ModelKind::control_variate,
          {theta_, pending_sum_, static_cast<double>(pending_n_)}};
}

void ControlVariateModel::restore(const ModelState& state) {
  check_state(state);
  if (state.payload.size() != 3)
    throw std::invalid_argument("control variates: malformed checkpoint payload");
  theta_ = state.payload[0];
  pending_sum_ = state.payload[1];
  pending_n_ = static_cast<std::uint64_t>(state.payload[2]);
}

void ControlVariateModel::on_batch_end(const BatchStats&) {
  if (adapt_ && pending_n_ > 0)
    theta_ = -12.0 * pending_sum_ / static_cast<double>(pending_n_);
  pending_sum_ = 0.0;
  pending_n_ = 0;
}

std::unique_ptr<ProcessModel> ControlVariateModel::clone() const {
  return std::make_unique<ControlVariateModel>(*this);
}

std::string ControlVariateModel::config_string() const {
  std::string out = "cv:";
  if (psi_.name() == "usq_half") {
    out += "usq_half";
  } else {
    out += "poly:";
    const auto& cs = psi_.coefficients();
    for (std::size_t i = 0; i < cs.size(); ++i) {
      if (i) out += ',';
      out += format_double(cs[i]);
    }
  }
  if (!adapt_) out += ":crude";
  return out;
}

// ---------------------------------------------------------------------------
// parse_model

ModelFactory parse_model(std::string_view spec) {
  const auto parts = split(spec, ':');
  if (parts.empty() || parts[0].empty())
    throw std::invalid_argument("model: empty spec");

  if (parts[0] == "iid") {
    if (parts.size() != 4)
      throw std::invalid_argument("model: expected iid:<normal|uniform>:<mean>:<var>");
    IidModel::Law law;
    if (parts[1] == "normal") law = IidModel::Law::normal;
    else if (parts[1] == "uniform") law = IidModel::Law::uniform;
    else throw std::invalid_argument("model: unknown iid law '" + std::string(parts[1]) + "'");
    const double mean = parse_double(parts[2], "mean");
    const double var = parse_double(parts[3], "variance");
    IidModel prototype(law, mean, var); // validate now
    return {[law, mean, var] { return std::make_unique<IidModel>(law, mean, var); },
            mean, prototype.config_string()};
  }

  if (parts[0] == "arch1") {
    if (parts.size() != 4)
      throw std::invalid_argument("model: expected arch1:<alpha>:<beta>:<dof>");
    const double alpha = parse_double(parts[1], "alpha");
    const double beta = parse_double(parts[2], "beta");
    const double dof_d = parse_double(parts[3], "dof");
    if (dof_d < 1.0 || dof_d != std::floor(dof_d))
      throw std::invalid_argument("model: arch1 dof must be a positive integer");
    const unsigned dof = static_cast<unsigned>(dof_d);
    Arch1Model prototype(alpha, beta, dof);
    return {[alpha, beta, dof] { return std::make_unique<Arch1Model>(alpha, beta, dof); },
            0.0, prototype.config_string()};
  }

  if (parts[0] == "cv") {
    if (parts.size() < 2)
      throw std::invalid_argument("model: expected cv:<integrand>[...][:crude]");
    bool adapt = true;
    std::size_t end = parts.size();
    if (parts[end - 1] == "crude") {
      adapt = false;
      --end;
    }
    Integrand psi = [&]() {
      if (parts[1] == "poly") {
        if (end != 3)
          throw std::invalid_argument("model: expected cv:poly:<c0,c1,...>[:crude]");
        std::vector<double> coeffs;
        for (auto item : split(parts[2], ','))
          coeffs.push_back(parse_double(item, "coefficient"));
        return Integrand::polynomial(std::move(coeffs));
      }
      if (end != 2)
        throw std::invalid_argument("model: expected cv:<builtin>[:crude]");
      return Integrand::builtin(parts[1]);
    }();
    ControlVariateModel prototype(psi, adapt);
    const double mu = prototype.true_mean();
    const std::string canonical = prototype.config_string();
    return {[psi, adapt] { return std::make_unique<ControlVariateModel>(psi, adapt); },
            mu, canonical};
  }

  throw std::invalid_argument("model: unknown kind '" + std::string(parts[0]) + "'");
}

// ---------------------------------------------------------------------------

double branch_for_resample(const ProcessModel& model, const ModelState& at_boundary,
                           RngStream& branch_stream, std::uint64_t batch_len) {
  if (batch_len < 1)
    throw std::invalid_argument("branch_for_resample: batch_len must be >= 1");
  const std::unique_ptr<ProcessModel> branched = model.clone();
  branched->restore(at_boundary);
  double sum = 0.0;
  for (std::uint64_t i = 0; i < batch_len; ++i)
    sum += branched->next_sample(branch_stream).value;
  return sum / static_cast<double>(batch_len);
}

} // namespace mdstop
