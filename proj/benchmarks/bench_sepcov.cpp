#include <benchmark/benchmark.h>

#include "sepcov/detequiv.hpp"
#include "sepcov/ensemble.hpp"
#include "sepcov/examples.hpp"

using namespace sepcov;

static void BM_HermitianEig(benchmark::State& state) {
  const auto dim = state.range(0);
  const CMatrix y = sample_X(dim, dim, EntryDistribution::complex_gaussian(), 1);
  const CMatrix h = y * y.adjoint();
  for (auto _ : state) benchmark::DoNotOptimize(hermitian_eig(h));
}
BENCHMARK(BM_HermitianEig)->Arg(64)->Arg(200)->Arg(500)->Unit(benchmark::kMillisecond);

static void BM_DualSolveExample1(benchmark::State& state) {
  const auto ex = build_example({Example::CovarianceMixture, state.range(0)});
  const DualSystem sys(ex.model);
  int iterations = 0;
  for (auto _ : state) {
    const auto sol = solve_dual_system(sys, Complex(1.5, 0.1));
    iterations = sol.iterations;
  }
  state.counters["iterations"] = iterations;
}
BENCHMARK(BM_DualSolveExample1)->Arg(20)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_DualMapSideA(benchmark::State& state) {
  const auto ex = build_example({Example::CovarianceMixture, state.range(0)});
  const DualSystem sys(ex.model);
  const CMatrix delta_b = -sys.gram().b / Complex(1.5, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(sys.map(Side::A, delta_b, Complex(1.5, 0.1)));
}
BENCHMARK(BM_DualMapSideA)->Arg(20)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_DensityCurveExample2(benchmark::State& state) {
  const auto ex = build_example({Example::MovingAverage, state.range(0)});
  const auto grid = linear_grid(0.0, 8.0, 50);
  for (auto _ : state) benchmark::DoNotOptimize(density_curve(ex.model, 0.05, grid));
}
BENCHMARK(BM_DensityCurveExample2)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_EmpiricalSpectrum(benchmark::State& state) {
  const auto ex = build_example({Example::PermutationMixture, state.range(0)});
  const Realization real = simulate(ex.model, ex.dist, 7);
  for (auto _ : state) benchmark::DoNotOptimize(empirical_spectrum(ex.model, real.eig_s, Side::A));
}
BENCHMARK(BM_EmpiricalSpectrum)->Arg(32)->Arg(100)->Unit(benchmark::kMillisecond);
