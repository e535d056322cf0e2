#pragma once

#include <cstddef>
#include <vector>

#include "commutree/events.hpp"
#include "commutree/mi_solver.hpp"
#include "commutree/tree.hpp"

namespace commutree {

struct Phase1Config {
  std::size_t max_iterations = 1'000'000;
  /// Sequential canonical leaf order (byte-identical trees across runs).
  bool deterministic = true;
  int worker_count = 1;
  EventSink on_event;

  void validate() const;
};

struct PartitionResult {
  PartitionTree tree;
  std::vector<PartitionEvent> events;
  std::size_t iterations = 0;
  double runtime_seconds = 0.0;
};

/// Builds the feasible commutation map on Theta (already scaled). Throws
/// ThetaExceedsFeasibleSet with the offending barycenter, or
/// IterationCapExceeded.
PartitionResult build_partition(MixedIntegerOracle& oracle, const Polytope& theta,
                                const Phase1Config& cfg = {},
                                const ScalingTransform& transform = {});

/// Depth bound ceil(p(p+1) log2(l0/kappa) / 2), clamped at 0.
int estimate_depth_bound(double l0, double kappa, int p);

}  // namespace commutree
