#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "commutree/mi_solver.hpp"
#include "commutree/tree.hpp"

namespace commutree {

class Rng;

struct VerifyOptions {
  int samples_per_leaf = 100;
  std::uint64_t seed = 1;
  /// Slack on value comparisons (suboptimality checks).
  double value_tolerance = 1e-6;
  double volume_tolerance = 1e-6;
};

struct VerifyCheck {
  std::string name;
  bool passed = true;
  std::size_t evaluated = 0;
  /// First violation, if any.
  NodeId leaf = kNoNode;
  Point theta;
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool ok() const;
};

/// Post-hoc checks of a finished tree against solver oracles. The oracle's
/// program must be in tree (scaled) coordinates. Checks: closed leaves,
/// vertex feasibility, sampled interior feasibility, sampled suboptimality on
/// certified leaves, volume conservation, query against linear scan and the
/// query cost bound.
VerifyReport verify_tree(const PartitionTree& tree, MixedIntegerOracle& oracle,
                         const VerifyOptions& opts = {});

/// Uniform sample from the simplex spanned by the vertex columns.
Point sample_simplex(const Eigen::MatrixXd& vertices, Rng& rng);

}  // namespace commutree
