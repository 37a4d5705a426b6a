// harness.hpp
//
// Grid evaluation of a stopping rule: for every (epsilon, delta) cell of
// a log-spaced grid, run n independent stopped experiments, score each by
// whether the resampled output lands within epsilon of the exact mean,
// and aggregate the empirical success probability p, the reliability
// R = p/(1-delta), and the complexity CM = mean(tau^ell - (tau-1)^ell).
// Cell x run tasks execute concurrently; the result is a deterministic
// function of the base seed, independent of worker count.
#pragma once

#include "mdstop/process.hpp"
#include "mdstop/schedule.hpp"
#include "mdstop/stopping.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mdstop {

struct EvalGrid {
  std::vector<double> epsilons; // ascending, geometric
  std::vector<double> deltas;   // ascending, geometric, inside (0,1)
};

/// Geometric axes from (eps_lo, eps_hi) x (delta_lo, delta_hi) with
/// `points` values per axis, endpoints exact. Requires 0 < lo < hi per
/// axis, delta_hi < 1 and points >= 2.
EvalGrid build_grid(double eps_lo, double eps_hi, double delta_lo, double delta_hi,
                    std::size_t points);

struct CellReport {
  double epsilon = 0.0;
  double delta = 0.0;
  std::uint64_t successes = 0; // exact count, p = successes / runs
  double p = 0.0;
  double reliability = 0.0;    // p / (1 - delta)
  double complexity = 0.0;     // mean of tau^ell - (tau-1)^ell
  double mean_tau = 0.0;
  std::uint64_t capped = 0;    // runs that hit t_max (counted as failures)
};

struct SummaryStats {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct GridSummary {
  SummaryStats reliability;
  SummaryStats complexity;
};

struct GridReport {
  std::string model_spec;
  std::string schedule_spec;
  StoppingConfig base_config; // epsilon/delta are per-cell, rest applies
  std::uint64_t runs_per_cell = 0;
  unsigned ell = 5;
  std::uint64_t base_seed = 0;
  EvalGrid grid;
  /// Row-major over (epsilon index, delta index).
  std::vector<CellReport> cells;
  GridSummary summary;
};

/// Mean/min/max of reliability and complexity over all cells.
GridSummary summarize(const GridReport& report);

/// Runs the full grid. Per-run streams are keyed
/// (base_seed, evaluate, cell_index, run_index, branch), so the report is
/// identical for any `threads` value. threads = 0 means hardware
/// concurrency.
GridReport evaluate(const ModelFactory& factory, const BatchSchedule& schedule,
                    const EvalGrid& grid, const StoppingConfig& base,
                    std::uint64_t runs_per_cell, unsigned ell,
                    std::uint64_t base_seed, unsigned threads = 0);

/// One row per cell: eps, delta, p, R, CM, mean_tau, capped. Floats carry
/// 17 significant digits so re-parsing is lossless.
void write_cells_csv(const GridReport& report, std::ostream& os);

/// Summary document with the grid metadata and mean/min/max blocks.
void write_summary_json(const GridReport& report, std::ostream& os);

} // namespace mdstop
