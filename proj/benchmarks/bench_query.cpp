#include <benchmark/benchmark.h>

#include <vector>

#include "commutree/instance_gen.hpp"
#include "commutree/phase1.hpp"
#include "commutree/phase2.hpp"
#include "commutree/verify.hpp"

using namespace commutree;

namespace {

const PartitionTree& refined_toy2d() {
  static const PartitionTree tree = [] {
    static const auto toy = make_toy2d();
    MixedIntegerOracle oracle(toy.program);
    auto t = build_partition(oracle, toy.theta).tree;
    Phase2Config cfg;
    cfg.eps_abs = 0.12;
    cfg.rho_max = 20.0;
    return refine_partition(std::move(t), oracle, cfg).tree;
  }();
  return tree;
}

std::vector<Point> sample_points(int count) {
  Rng rng(1);
  std::vector<Point> pts;
  for (int i = 0; i < count; ++i) pts.emplace_back(Eigen::Vector2d(rng.uniform(-1, 1), rng.uniform(-1, 1)));
  return pts;
}

}  // namespace

static void BM_TreeQuery(benchmark::State& state) {
  const auto& tree = refined_toy2d();
  const auto pts = sample_points(1024);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(query(tree, pts[i++ % pts.size()]));
  state.counters["leaves"] = static_cast<double>(tree.leaves().size());
}
BENCHMARK(BM_TreeQuery);

static void BM_LinearScan(benchmark::State& state) {
  const auto& tree = refined_toy2d();
  const auto pts = sample_points(1024);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(linear_scan(tree, pts[i++ % pts.size()]));
}
BENCHMARK(BM_LinearScan);

BENCHMARK_MAIN();
