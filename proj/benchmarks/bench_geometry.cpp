#include <benchmark/benchmark.h>

#include <cmath>

#include "commutree/geometry.hpp"
#include "commutree/instance_gen.hpp"

using namespace commutree;

static void BM_DelaunayBox(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const auto box = box_polytope(-Eigen::VectorXd::Ones(p), Eigen::VectorXd::Ones(p));
  for (auto _ : state) benchmark::DoNotOptimize(delaunay_triangulate(box));
}
BENCHMARK(BM_DelaunayBox)->DenseRange(2, 5)->Unit(benchmark::kMicrosecond);

static void BM_DelaunayTheta(benchmark::State& state) {
  const auto mc = make_mc_draft(static_cast<int>(state.range(0)), 3, 1, RobustMode::BoxTightened);
  for (auto _ : state) benchmark::DoNotOptimize(delaunay_triangulate(mc.theta_normalized));
  state.counters["vertices"] = mc.theta_normalized.num_vertices();
}
BENCHMARK(BM_DelaunayTheta)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

static void BM_ConditionNumber(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  Rng rng(3);
  Eigen::MatrixXd v(p, p + 1);
  for (int i = 0; i < v.size(); ++i) v.data()[i] = rng.normal();
  const Simplex s(v);
  for (auto _ : state) benchmark::DoNotOptimize(condition_number(s));
}
BENCHMARK(BM_ConditionNumber)->Arg(2)->Arg(6);

static void BM_Barycentric(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  Rng rng(4);
  Eigen::MatrixXd v(p, p + 1);
  for (int i = 0; i < v.size(); ++i) v.data()[i] = rng.normal();
  const Simplex s(v);
  const Point x = v.rowwise().mean();
  for (auto _ : state) benchmark::DoNotOptimize(barycentric_coordinates(s, x));
}
BENCHMARK(BM_Barycentric)->Arg(2)->Arg(6);

BENCHMARK_MAIN();
