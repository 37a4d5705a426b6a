#include "mdstop/normal.hpp"
#include "mdstop/process.hpp"
#include "mdstop/rng.hpp"
#include "mdstop/schedule.hpp"
#include "mdstop/stopping.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace mdstop;

void BM_normal_cdf(benchmark::State& state) {
  double x = -8.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(normal_cdf(x));
    x += 1e-4;
    if (x > 8.0) x = -8.0;
  }
}
BENCHMARK(BM_normal_cdf);

void BM_normal_quantile(benchmark::State& state) {
  double p = 1e-6;
  for (auto _ : state) {
    benchmark::DoNotOptimize(normal_quantile(p));
    p += 1e-5;
    if (p > 1.0 - 1e-6) p = 1e-6;
  }
}
BENCHMARK(BM_normal_quantile);

void BM_scaled_t_draw(benchmark::State& state) {
  RngStream stream(1, {1, 0, 0, false});
  for (auto _ : state) benchmark::DoNotOptimize(stream.scaled_t(6));
}
BENCHMARK(BM_scaled_t_draw);

void BM_arch1_next_sample(benchmark::State& state) {
  Arch1Model model(0.03, 0.3, 6);
  RngStream stream(1, {1, 0, 0, false});
  for (auto _ : state) benchmark::DoNotOptimize(model.next_sample(stream).value);
}
BENCHMARK(BM_arch1_next_sample);

void BM_cv_next_sample(benchmark::State& state) {
  ControlVariateModel model(Integrand::builtin("usq_half"));
  RngStream stream(1, {1, 0, 0, false});
  for (auto _ : state) benchmark::DoNotOptimize(model.next_sample(stream).value);
}
BENCHMARK(BM_cv_next_sample);

void BM_criterion_probability(benchmark::State& state) {
  double v = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(criterion_probability(0.05, 4651.0, v, 0.25));
    v += 1e-4;
    if (v > 2.0) v = 0.1;
  }
}
BENCHMARK(BM_criterion_probability);

void BM_run_stopping_iid(benchmark::State& state) {
  const ModelFactory factory = parse_model("iid:normal:0:1");
  const BatchSchedule sched = BatchSchedule::polynomial(5);
  StoppingConfig cfg;
  cfg.epsilon = 0.2;
  cfg.delta = 0.1;
  std::uint64_t run = 0;
  for (auto _ : state) {
    RngStream primary(1, {1, 0, run, false});
    RngStream branch(1, {1, 0, run, true});
    ++run;
    auto model = factory.make();
    benchmark::DoNotOptimize(run_stopping(*model, sched, cfg, primary, branch).mu_star);
  }
}
BENCHMARK(BM_run_stopping_iid);

void BM_run_stopping_arch1(benchmark::State& state) {
  const ModelFactory factory = parse_model("arch1:0.03:0.3:6");
  const BatchSchedule sched = BatchSchedule::polynomial(5);
  StoppingConfig cfg;
  cfg.epsilon = 0.1;
  cfg.delta = 0.1;
  std::uint64_t run = 0;
  for (auto _ : state) {
    RngStream primary(1, {1, 0, run, false});
    RngStream branch(1, {1, 0, run, true});
    ++run;
    auto model = factory.make();
    benchmark::DoNotOptimize(run_stopping(*model, sched, cfg, primary, branch).mu_star);
  }
}
BENCHMARK(BM_run_stopping_arch1);

} // namespace

BENCHMARK_MAIN();
