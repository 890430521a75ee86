// Serial reference vs OpenMP kernels.
#include "carnot/contraction.hpp"
#include "carnot/geodesic.hpp"
#include "carnot/group_io.hpp"
#include "carnot/heisenberg.hpp"
#include "carnot/singularity.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace carnot;

Execution mode(const benchmark::State& state) { return state.range(0) ? Execution::parallel : Execution::serial; }

void BM_ExpMap(benchmark::State& state) {
  const CarnotSpec spec = load_group("engel");
  ExtremalIntegrator integrator(spec);
  Covector h(4);
  h << 0.6, 0.8, 1.5, -0.7;
  for (auto _ : state) benchmark::DoNotOptimize(integrator.endpoint(h, 1.0, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_ExpMap)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);

void BM_MonteCarlo(benchmark::State& state) {
  const auto set = heisenberg::SetSpec::annulus(0.5, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(heisenberg::mcp_monte_carlo(set, 0.5, 5.0, 200000, 0.0, 1, mode(state)));
  }
}
BENCHMARK(BM_MonteCarlo)->Arg(0)->Arg(1)->ArgNames({"parallel"})->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_CurvatureExponent(benchmark::State& state) {
  const CarnotSpec spec = load_group("heisenberg1");
  SamplerConfig cfg;
  cfg.samples = 64;
  cfg.density.steps = 200;
  const auto grid = geometric_grid(1e-3, 0.9, 10);
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_curvature_exponent(spec, cfg, grid, 3, 5.0, mode(state)));
  }
}
BENCHMARK(BM_CurvatureExponent)->Arg(0)->Arg(1)->ArgNames({"parallel"})->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_WitnessSearch(benchmark::State& state) {
  const CarnotSpec spec = load_group("engel");
  for (auto _ : state) benchmark::DoNotOptimize(singular_witness_search(spec, 100, 7, mode(state)));
}
BENCHMARK(BM_WitnessSearch)->Arg(0)->Arg(1)->ArgNames({"parallel"})->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
