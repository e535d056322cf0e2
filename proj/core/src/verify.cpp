#include "commutree/verify.hpp"

#include <cmath>
#include <sstream>

#include "commutree/errors.hpp"
#include "commutree/instance_gen.hpp"

namespace commutree {

bool VerifyReport::ok() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

Point sample_simplex(const Eigen::MatrixXd& vertices, Rng& rng) {
  Eigen::VectorXd w(vertices.cols());
  for (Eigen::Index j = 0; j < w.size(); ++j) w(j) = -std::log(1.0 - rng.uniform());
  w /= w.sum();
  return vertices * w;
}

namespace {

void fail(VerifyCheck& c, NodeId leaf, const Point& theta, std::string detail) {
  if (!c.passed) return;
  c.passed = false;
  c.leaf = leaf;
  c.theta = theta;
  c.detail = std::move(detail);
}

}  // namespace

VerifyReport verify_tree(const PartitionTree& tree, MixedIntegerOracle& oracle, const VerifyOptions& opts) {
  if (opts.samples_per_leaf < 0) throw InvalidInput("samples per leaf must be nonnegative");
  if (tree.p() != oracle.program().p()) throw InvalidInput("tree dimension differs from program p");
  VerifyCheck closed;
  closed.name = "closed_leaves";
  VerifyCheck vertex;
  vertex.name = "vertex_feasibility";
  VerifyCheck interior;
  interior.name = "interior_feasibility";
  VerifyCheck subopt;
  subopt.name = "suboptimality";
  VerifyCheck volume;
  volume.name = "volume_conservation";
  VerifyCheck query_scan;
  query_scan.name = "query_matches_scan";
  VerifyCheck cost;
  cost.name = "query_cost_bound";

  const auto leaves = tree.leaves();
  const auto& ref = tree.refinement;
  const int bound = query_cost_bound(tree);
  Rng rng(opts.seed);
  double leaf_volume = 0.0;
  for (NodeId id : leaves) {
    const auto& n = tree.node(id);
    leaf_volume += node_volume(n);
    ++closed.evaluated;
    if (!is_closed_leaf(n.status) || !n.delta) {
      fail(closed, id, n.vertices.rowwise().mean(), "leaf is open or carries no commutation");
      continue;
    }
    const Commutation& delta = *n.delta;
    for (Eigen::Index j = 0; j < n.vertices.cols(); ++j) {
      ++vertex.evaluated;
      const SolveOutcome o = oracle.solve_fixed(n.vertices.col(j), delta);
      if (!o.optimal())
        fail(vertex, id, n.vertices.col(j),
             "commutation " + delta.to_string() + " is " + to_string(o.status) + " at a vertex");
    }
    for (int s = 0; s < opts.samples_per_leaf; ++s) {
      const Point theta = sample_simplex(n.vertices, rng);
      ++interior.evaluated;
      const SolveOutcome o = oracle.solve_fixed(theta, delta);
      if (!o.optimal()) {
        fail(interior, id, theta, "commutation " + delta.to_string() + " is " + to_string(o.status));
        continue;
      }
      if (ref && n.status == NodeStatus::CertifiedEpsSuboptimal) {
        ++subopt.evaluated;
        const MinlpResult best = oracle.solve_minlp(theta);
        if (best.status != MinlpStatus::Optimal) {
          fail(subopt, id, theta, "reference solve failed");
        } else {
          const double gap = o.value - best.value();
          const bool abs_ok = gap <= ref->eps_abs + opts.value_tolerance;
          const bool rel_ok =
              ref->eps_rel > 0 && o.value > 0 && gap / o.value <= ref->eps_rel + opts.value_tolerance;
          if (!abs_ok && !rel_ok) {
            std::ostringstream os;
            os << "suboptimality " << gap << " exceeds eps_abs " << ref->eps_abs;
            if (ref->eps_rel > 0) os << " (relative " << gap / o.value << ", eps_rel " << ref->eps_rel << ")";
            fail(subopt, id, theta, os.str());
          }
        }
      }
      ++query_scan.evaluated;
      const QueryResult q = query(tree, theta);
      const NodeId scan = linear_scan(tree, theta);
      if (q.leaf != scan)
        fail(query_scan, id, theta,
             "query found leaf " + std::to_string(q.leaf) + ", scan found " + std::to_string(scan));
      ++cost.evaluated;
      if (q.membership_tests > bound)
        fail(cost, id, theta,
             std::to_string(q.membership_tests) + " membership tests exceed the bound " + std::to_string(bound));
    }
  }
  ++volume.evaluated;
  const double theta_volume = polytope_volume(tree.theta());
  if (std::abs(leaf_volume - theta_volume) > opts.volume_tolerance * theta_volume) {
    std::ostringstream os;
    os << "leaf volume " << leaf_volume << " differs from Theta volume " << theta_volume;
    fail(volume, kNoNode, Point(), os.str());
  }
  VerifyReport r;
  r.checks = {closed, vertex, interior, subopt, volume, query_scan, cost};
  return r;
}

}  // namespace commutree
