#include <benchmark/benchmark.h>

#include "rfls/config.hpp"
#include "rfls/covariance.hpp"
#include "rfls/sim.hpp"
#include "rfls/synthesis.hpp"

namespace {

namespace ref = rfls::homodyne::reference;

const rfls::config::Model& model() {
  static const auto m = rfls::config::build_model(rfls::config::default_config());
  return m;
}

// A point where both Riccati equations have admissible solutions.
rfls::synthesis::ScalingPoint design_point() {
  rfls::Vector l(4);
  l << 1.0, 0.49, 1e-6, 1e-6;
  return {1.1e-6, l};
}

void BM_Synthesize(benchmark::State& state) {
  const auto p = design_point();
  for (auto _ : state) benchmark::DoNotOptimize(rfls::synthesis::synthesize(model().compact, p));
}
BENCHMARK(BM_Synthesize);

void BM_Feasible(benchmark::State& state) {
  const auto p = design_point();
  for (auto _ : state) benchmark::DoNotOptimize(rfls::synthesis::feasible(p, model().compact));
}
BENCHMARK(BM_Feasible);

void BM_MinimizeBoundSingleStart(benchmark::State& state) {
  rfls::synthesis::OptimizerOptions oo;
  oo.starts = 1;
  oo.threads = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rfls::synthesis::minimize_bound(model().compact, design_point(), oo));
  }
}
BENCHMARK(BM_MinimizeBoundSingleStart)->Unit(benchmark::kMillisecond);

void BM_Sweep21(benchmark::State& state) {
  const auto s = rfls::synthesis::synthesize(model().compact, design_point());
  const auto grid = rfls::covariance::uniform_grid(21);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rfls::covariance::delta_sweep(model().compact, s, grid, ref::delta));
  }
}
BENCHMARK(BM_Sweep21)->Unit(benchmark::kMillisecond);

void BM_SimulateRun(benchmark::State& state) {
  const auto s = rfls::synthesis::synthesize(model().compact, design_point());
  const auto gains = rfls::sim::loop_gains(s, model().compact);
  rfls::sim::SimConfig cfg;
  cfg.horizon = 1e-4;
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(rfls::sim::simulate_run(cfg, gains, ++seed));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cfg.horizon / cfg.dt));
}
BENCHMARK(BM_SimulateRun)->Unit(benchmark::kMillisecond);

}  // namespace
