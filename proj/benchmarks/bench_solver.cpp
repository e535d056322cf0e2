#include <benchmark/benchmark.h>

#include "commutree/conic_solver.hpp"
#include "commutree/instance_gen.hpp"
#include "commutree/mi_solver.hpp"

using namespace commutree;

static void BM_ToyFixedSolve(benchmark::State& state) {
  const auto toy = make_toy1d();
  const Point th = Point::Constant(1, 0.1);
  const auto delta = Commutation::from_string("0");
  for (auto _ : state) benchmark::DoNotOptimize(solve_fixed_commutation(toy.program, th, delta));
}
BENCHMARK(BM_ToyFixedSolve);

static void BM_MpcFixedSolve(benchmark::State& state) {
  const auto mc = generate_instance(static_cast<int>(state.range(0)), 3, 1, RobustMode::BoxTightened);
  const Point th = mc.theta_normalized.vertices().rowwise().mean();
  const auto found = solve_minlp(*mc.program, th);
  for (auto _ : state) benchmark::DoNotOptimize(solve_fixed_commutation(*mc.program, th, found.delta));
}
BENCHMARK(BM_MpcFixedSolve)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMicrosecond);

static void BM_MpcMinlp(benchmark::State& state) {
  const auto mc = generate_instance(static_cast<int>(state.range(0)), 3, 1, RobustMode::BoxTightened);
  const Point th = mc.theta_normalized.vertices().rowwise().mean();
  MinlpOptions opts;
  opts.memoize = false;
  for (auto _ : state) benchmark::DoNotOptimize(solve_minlp(*mc.program, th, opts));
}
BENCHMARK(BM_MpcMinlp)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
