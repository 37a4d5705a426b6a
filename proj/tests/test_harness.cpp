#include "mdstop/harness.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <stdexcept>

using namespace mdstop;

namespace {

StoppingConfig degenerate_config() {
  StoppingConfig cfg;
  cfg.epsilon = 1.0; // per-cell values overwrite these
  cfg.delta = 0.5;
  cfg.variance_kind = VarianceKind::conditional;
  cfg.inflation = Inflation::none();
  return cfg;
}

} // namespace

TEST_CASE("grid axes are geometric with exact endpoints") {
  const EvalGrid g3 = build_grid(0.001, 0.1, 0.001, 0.1, 3);
  REQUIRE(g3.epsilons.size() == 3);
  CHECK(g3.epsilons[0] == 0.001);
  CHECK(g3.epsilons[1] == Catch::Approx(0.01).epsilon(1e-12));
  CHECK(g3.epsilons[2] == 0.1);

  const EvalGrid g10 = build_grid(0.001, 0.1, 0.001, 0.1, 10);
  REQUIRE(g10.deltas.size() == 10);
  CHECK(g10.deltas.front() == 0.001);
  CHECK(g10.deltas.back() == 0.1);
  for (std::size_t i = 0; i < 10; ++i) {
    const double expected = 0.001 * std::pow(100.0, static_cast<double>(i) / 9.0);
    CHECK(g10.epsilons[i] == Catch::Approx(expected).epsilon(1e-12));
  }
  for (std::size_t i = 1; i < 10; ++i) CHECK(g10.epsilons[i] > g10.epsilons[i - 1]);
}

TEST_CASE("grid construction rejects bad ranges") {
  CHECK_THROWS_AS(build_grid(0.01, 0.01, 0.001, 0.1, 3), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(0.1, 0.01, 0.001, 0.1, 3), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(0.001, 0.1, 0.2, 0.1, 3), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(0.001, 0.1, 0.001, 1.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(0.0, 0.1, 0.001, 0.1, 3), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(0.001, 0.1, 0.001, 0.1, 1), std::invalid_argument);
}

TEST_CASE("degenerate model succeeds everywhere: p = 1, R = 1/(1-delta)") {
  const ModelFactory factory = parse_model("iid:normal:3:0");
  const auto sched = BatchSchedule::polynomial(5);
  const EvalGrid grid = build_grid(0.01, 0.1, 0.05, 0.2, 2);
  const GridReport report =
      evaluate(factory, sched, grid, degenerate_config(), 10, 5, 77, 1);
  REQUIRE(report.cells.size() == 4);
  for (const CellReport& c : report.cells) {
    CHECK(c.p == 1.0);
    CHECK(c.successes == 10);
    CHECK(c.reliability == 1.0 / (1.0 - c.delta));
    CHECK(c.capped == 0);
  }
}

TEST_CASE("all runs stopping at tau=2 give CM = 31 under ell=5") {
  const ModelFactory factory = parse_model("iid:normal:3:0");
  const auto sched = BatchSchedule::polynomial(5);
  StoppingConfig cfg = degenerate_config();
  cfg.min_batch = 2; // sigma=0 fires immediately once eligible
  const EvalGrid grid = build_grid(0.01, 0.1, 0.05, 0.2, 2);
  const GridReport report = evaluate(factory, sched, grid, cfg, 25, 5, 78, 1);
  for (const CellReport& c : report.cells) {
    CHECK(c.mean_tau == 2.0);
    CHECK(c.complexity == 31.0); // 2^5 - 1^5
  }
}

TEST_CASE("success counts are exact integers") {
  const ModelFactory factory = parse_model("iid:normal:0:1");
  const auto sched = BatchSchedule::polynomial(5);
  StoppingConfig cfg;
  cfg.epsilon = 0.1;
  cfg.delta = 0.1;
  const EvalGrid grid = build_grid(0.05, 0.2, 0.05, 0.2, 2);
  const GridReport report = evaluate(factory, sched, grid, cfg, 40, 5, 79, 2);
  for (const CellReport& c : report.cells) {
    CHECK(c.p * 40.0 == static_cast<double>(c.successes));
    CHECK(c.reliability == c.p / (1.0 - c.delta));
  }
}

TEST_CASE("report is identical for any worker count") {
  const ModelFactory factory = parse_model("cv:usq_half");
  const auto sched = BatchSchedule::polynomial(5);
  StoppingConfig cfg;
  cfg.epsilon = 0.1;
  cfg.delta = 0.1;
  const EvalGrid grid = build_grid(0.02, 0.1, 0.02, 0.1, 3);

  const GridReport serial = evaluate(factory, sched, grid, cfg, 30, 5, 80, 1);
  const GridReport threaded = evaluate(factory, sched, grid, cfg, 30, 5, 80, 2);
  const GridReport threaded4 = evaluate(factory, sched, grid, cfg, 30, 5, 80, 4);

  auto csv = [](const GridReport& r) {
    std::ostringstream os;
    write_cells_csv(r, os);
    return os.str();
  };
  CHECK(csv(serial) == csv(threaded));
  CHECK(csv(serial) == csv(threaded4));

  auto json_text = [](const GridReport& r) {
    std::ostringstream os;
    write_summary_json(r, os);
    return os.str();
  };
  CHECK(json_text(serial) == json_text(threaded));
}

TEST_CASE("grid-mean complexity decreases along both axes") {
  const ModelFactory factory = parse_model("cv:usq_half");
  const auto sched = BatchSchedule::polynomial(5);
  StoppingConfig cfg;
  cfg.epsilon = 0.1;
  cfg.delta = 0.1;
  const EvalGrid grid = build_grid(0.01, 0.1, 0.01, 0.1, 3);
  const GridReport report = evaluate(factory, sched, grid, cfg, 50, 5, 81, 2);

  const std::size_t n = 3;
  auto cm = [&](std::size_t ei, std::size_t di) {
    return report.cells[ei * n + di].complexity;
  };
  int eps_inversions = 0, delta_inversions = 0;
  for (std::size_t di = 0; di < n; ++di)
    for (std::size_t ei = 0; ei + 1 < n; ++ei)
      if (cm(ei + 1, di) > cm(ei, di)) ++eps_inversions;
  for (std::size_t ei = 0; ei < n; ++ei)
    for (std::size_t di = 0; di + 1 < n; ++di)
      if (cm(ei, di + 1) > cm(ei, di)) ++delta_inversions;
  CHECK(eps_inversions <= 1); // sampling noise allowance
  CHECK(delta_inversions <= 1);
}

TEST_CASE("summaries aggregate the cells") {
  GridReport report;
  report.cells.resize(2);
  report.cells[0].reliability = 1.0;
  report.cells[0].complexity = 31.0;
  report.cells[1].reliability = 1.1;
  report.cells[1].complexity = 211.0;
  const GridSummary s = summarize(report);
  CHECK(s.reliability.mean == Catch::Approx(1.05));
  CHECK(s.reliability.min == 1.0);
  CHECK(s.reliability.max == 1.1);
  CHECK(s.complexity.mean == Catch::Approx(121.0));
  CHECK(s.complexity.min == 31.0);
  CHECK(s.complexity.max == 211.0);
}

TEST_CASE("csv layout is one row per cell with a header") {
  const ModelFactory factory = parse_model("iid:normal:3:0");
  const auto sched = BatchSchedule::polynomial(5);
  const EvalGrid grid = build_grid(0.01, 0.1, 0.05, 0.2, 2);
  const GridReport report =
      evaluate(factory, sched, grid, degenerate_config(), 5, 5, 82, 1);
  std::ostringstream os;
  write_cells_csv(report, os);
  const std::string text = os.str();
  CHECK(text.rfind("eps,delta,p,R,CM,mean_tau,capped\n", 0) == 0);
  std::size_t lines = 0;
  for (char ch : text)
    if (ch == '\n') ++lines;
  CHECK(lines == 1 + 4);
}
