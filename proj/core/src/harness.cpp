#include "mdstop/harness.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace mdstop {

namespace {

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> geometric_axis(double lo, double hi, std::size_t points) {
  std::vector<double> axis(points);
  const double log_lo = std::log(lo);
  const double log_hi = std::log(hi);
  for (std::size_t i = 0; i < points; ++i) {
    const double w = static_cast<double>(i) / static_cast<double>(points - 1);
    axis[i] = std::exp(log_lo + w * (log_hi - log_lo));
  }
  axis.front() = lo; // endpoints exact
  axis.back() = hi;
  return axis;
}

double int_pow(double base, unsigned exponent) {
  double p = 1.0;
  for (unsigned i = 0; i < exponent; ++i) p *= base;
  return p;
}

const char* variance_kind_name(VarianceKind kind) {
  switch (kind) {
    case VarianceKind::empirical: return "empirical";
    case VarianceKind::conditional: return "conditional";
    case VarianceKind::theoretical: return "theoretical";
  }
  return "?";
}

const char* inflation_kind_name(Inflation::Kind kind) {
  switch (kind) {
    case Inflation::Kind::inv_t: return "inv_t";
    case Inflation::Kind::none: return "none";
    case Inflation::Kind::custom: return "custom";
  }
  return "?";
}

} // namespace

EvalGrid build_grid(double eps_lo, double eps_hi, double delta_lo, double delta_hi,
                    std::size_t points) {
  if (!(eps_lo > 0.0 && eps_lo < eps_hi))
    throw std::invalid_argument("grid: need 0 < eps_lo < eps_hi");
  if (!(delta_lo > 0.0 && delta_lo < delta_hi && delta_hi < 1.0))
    throw std::invalid_argument("grid: need 0 < delta_lo < delta_hi < 1");
  if (points < 2)
    throw std::invalid_argument("grid: need at least 2 points per axis");
  return {geometric_axis(eps_lo, eps_hi, points),
          geometric_axis(delta_lo, delta_hi, points)};
}

GridSummary summarize(const GridReport& report) {
  if (report.cells.empty())
    throw std::invalid_argument("summarize: empty report");
  GridSummary s;
  s.reliability = {0.0, report.cells[0].reliability, report.cells[0].reliability};
  s.complexity = {0.0, report.cells[0].complexity, report.cells[0].complexity};
  for (const CellReport& c : report.cells) {
    s.reliability.mean += c.reliability;
    s.reliability.min = std::min(s.reliability.min, c.reliability);
    s.reliability.max = std::max(s.reliability.max, c.reliability);
    s.complexity.mean += c.complexity;
    s.complexity.min = std::min(s.complexity.min, c.complexity);
    s.complexity.max = std::max(s.complexity.max, c.complexity);
  }
  const double n = static_cast<double>(report.cells.size());
  s.reliability.mean /= n;
  s.complexity.mean /= n;
  return s;
}

GridReport evaluate(const ModelFactory& factory, const BatchSchedule& schedule,
                    const EvalGrid& grid, const StoppingConfig& base,
                    std::uint64_t runs_per_cell, unsigned ell,
                    std::uint64_t base_seed, unsigned threads) {
  if (runs_per_cell < 1)
    throw std::invalid_argument("evaluate: runs_per_cell must be >= 1");
  if (grid.epsilons.empty() || grid.deltas.empty())
    throw std::invalid_argument("evaluate: empty grid");
  { // the per-cell configs are validated here once
    StoppingConfig probe = base;
    probe.epsilon = grid.epsilons.front();
    probe.delta = grid.deltas.front();
    probe.validate();
  }

  const std::size_t n_cells = grid.epsilons.size() * grid.deltas.size();
  const std::uint64_t n_tasks = n_cells * runs_per_cell;

  struct RunRecord {
    std::uint64_t tau = 0;
    bool success = false;
    bool capped = false;
  };
  std::vector<RunRecord> records(n_tasks);

  // Work is indexed by task id; workers claim ids from a shared counter
  // and write to disjoint slots, so the aggregation below never depends
  // on scheduling.
  std::atomic<std::uint64_t> next_task{0};
  auto worker = [&] {
    for (;;) {
      const std::uint64_t task = next_task.fetch_add(1);
      if (task >= n_tasks) return;
      const std::uint64_t cell = task / runs_per_cell;
      const std::uint64_t run = task % runs_per_cell;
      const std::size_t ei = cell / grid.deltas.size();
      const std::size_t di = cell % grid.deltas.size();

      StoppingConfig cfg = base;
      cfg.epsilon = grid.epsilons[ei];
      cfg.delta = grid.deltas[di];

      RngStream primary(base_seed, {static_cast<std::uint32_t>(StreamPurpose::evaluate),
                                    cell, run, false});
      RngStream branch(base_seed, {static_cast<std::uint32_t>(StreamPurpose::evaluate),
                                   cell, run, true});
      const std::unique_ptr<ProcessModel> model = factory.make();
      const StoppingOutcome out = run_stopping(*model, schedule, cfg, primary, branch);

      RunRecord& rec = records[task];
      rec.tau = out.tau;
      rec.capped = out.hit_cap;
      rec.success = !out.hit_cap &&
                    std::fabs(out.mu_star - factory.true_mean) <= cfg.epsilon;
    }
  };

  unsigned n_threads = threads != 0 ? threads : std::thread::hardware_concurrency();
  if (n_threads < 1) n_threads = 1;
  if (n_threads > 1) {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  } else {
    worker();
  }

  GridReport report;
  report.model_spec = factory.spec;
  report.schedule_spec = schedule.to_string();
  report.base_config = base;
  report.runs_per_cell = runs_per_cell;
  report.ell = ell;
  report.base_seed = base_seed;
  report.grid = grid;
  report.cells.reserve(n_cells);

  for (std::size_t ei = 0; ei < grid.epsilons.size(); ++ei) {
    for (std::size_t di = 0; di < grid.deltas.size(); ++di) {
      const std::uint64_t cell = ei * grid.deltas.size() + di;
      CellReport c;
      c.epsilon = grid.epsilons[ei];
      c.delta = grid.deltas[di];
      double cm_sum = 0.0;
      double tau_sum = 0.0;
      for (std::uint64_t run = 0; run < runs_per_cell; ++run) {
        const RunRecord& rec = records[cell * runs_per_cell + run];
        c.successes += rec.success ? 1 : 0;
        c.capped += rec.capped ? 1 : 0;
        const double tau = static_cast<double>(rec.tau);
        cm_sum += int_pow(tau, ell) - int_pow(tau - 1.0, ell);
        tau_sum += tau;
      }
      const double n = static_cast<double>(runs_per_cell);
      c.p = static_cast<double>(c.successes) / n;
      c.reliability = c.p / (1.0 - c.delta);
      c.complexity = cm_sum / n;
      c.mean_tau = tau_sum / n;
      report.cells.push_back(c);
    }
  }
  report.summary = summarize(report);
  return report;
}

void write_cells_csv(const GridReport& report, std::ostream& os) {
  os << "eps,delta,p,R,CM,mean_tau,capped\n";
  for (const CellReport& c : report.cells) {
    os << fmt17(c.epsilon) << ',' << fmt17(c.delta) << ',' << fmt17(c.p) << ','
       << fmt17(c.reliability) << ',' << fmt17(c.complexity) << ','
       << fmt17(c.mean_tau) << ',' << c.capped << '\n';
  }
}

void write_summary_json(const GridReport& report, std::ostream& os) {
  nlohmann::ordered_json j;
  j["model"] = report.model_spec;
  j["schedule"] = report.schedule_spec;
  j["variance"] = variance_kind_name(report.base_config.variance_kind);
  j["inflation"] = inflation_kind_name(report.base_config.inflation.kind);
  j["t_max"] = report.base_config.t_max;
  j["runs_per_cell"] = report.runs_per_cell;
  j["ell"] = report.ell;
  j["seed"] = report.base_seed;
  j["grid"]["eps"] = report.grid.epsilons;
  j["grid"]["delta"] = report.grid.deltas;
  j["reliability"] = {{"mean", report.summary.reliability.mean},
                      {"min", report.summary.reliability.min},
                      {"max", report.summary.reliability.max}};
  j["complexity"] = {{"mean", report.summary.complexity.mean},
                     {"min", report.summary.complexity.min},
                     {"max", report.summary.complexity.max}};
  std::uint64_t capped_total = 0;
  for (const CellReport& c : report.cells) capped_total += c.capped;
  j["capped_runs"] = capped_total;
  os << j.dump(2) << '\n';
}

} // namespace mdstop
