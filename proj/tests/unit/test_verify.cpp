#include <doctest.h>

#include "commutree/instance_gen.hpp"
#include "commutree/phase1.hpp"
#include "commutree/verify.hpp"

using namespace commutree;

namespace {

const VerifyCheck* find(const VerifyReport& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return &c;
  return nullptr;
}

}  // namespace

TEST_CASE("uniform simplex samples stay inside") {
  Rng rng(2);
  Eigen::MatrixXd tri(2, 3);
  tri << 0, 1, 0, 0, 0, 1;
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (int t = 0; t < 20000; ++t) {
    const Point x = sample_simplex(tri, rng);
    CHECK(barycentric_coordinates(Simplex(tri), x).contains);
    mean += x;
  }
  mean /= 20000;
  CHECK(mean(0) == doctest::Approx(1.0 / 3).epsilon(0.02));
  CHECK(mean(1) == doctest::Approx(1.0 / 3).epsilon(0.02));
}

TEST_CASE("a sound tree passes every check") {
  const auto toy = make_toy1d();
  MixedIntegerOracle oracle(toy.program);
  const auto tree = build_partition(oracle, toy.theta).tree;
  const auto report = verify_tree(tree, oracle);
  CHECK(report.ok());
  for (const char* name : {"closed_leaves", "vertex_feasibility", "interior_feasibility",
                           "volume_conservation", "query_matches_scan", "query_cost_bound"})
    CHECK(find(report, name) != nullptr);
  CHECK(find(report, "interior_feasibility")->evaluated == 200);

  VerifyOptions none;
  none.samples_per_leaf = 0;
  const auto vertex_only = verify_tree(tree, oracle, none);
  CHECK(vertex_only.ok());
  CHECK(find(vertex_only, "interior_feasibility")->evaluated == 0);
}

TEST_CASE("a flipped commutation is reported with its leaf") {
  const auto toy = make_toy1d();
  MixedIntegerOracle oracle(toy.program);
  auto tree = build_partition(oracle, toy.theta).tree;
  const NodeId victim = tree.leaves().front();
  auto& leaf = tree.node(victim);
  Commutation flipped = *leaf.delta;
  flipped.set(0, !flipped[0]);
  leaf.delta = flipped;
  const auto report = verify_tree(tree, oracle);
  CHECK_FALSE(report.ok());
  const auto* vf = find(report, "vertex_feasibility");
  REQUIRE(vf != nullptr);
  CHECK_FALSE(vf->passed);
  CHECK(vf->leaf == victim);
}

TEST_CASE("an open leaf fails closure") {
  const auto toy = make_toy1d();
  MixedIntegerOracle oracle(toy.program);
  auto tree = build_partition(oracle, toy.theta).tree;
  tree.node(tree.leaves().back()).status = NodeStatus::Open;
  const auto report = verify_tree(tree, oracle);
  CHECK_FALSE(find(report, "closed_leaves")->passed);
}
