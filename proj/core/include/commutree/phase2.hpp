#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "commutree/events.hpp"
#include "commutree/mi_solver.hpp"
#include "commutree/tree.hpp"

namespace commutree {

struct Phase2Config {
  double eps_abs = 1e-2;
  double eps_rel = 0.0;
  double rho_max = 100.0;
  double pi_abs = 0.0;
  double pi_rel = 0.05;
  double denom_floor = 1e-9;
  /// Cells whose longest edge drops below this close with a warning even if
  /// their conditioning is fine (guards non-terminating refinement where the
  /// error bound cannot shrink, e.g. at a shared vertex with a true gap).
  double min_edge = 1e-3;
  std::size_t max_iterations = 1'000'000;
  /// Also sweep every admissible commutation before certifying a cell.
  bool full_candidate_sweep = true;
  bool deterministic = true;
  int worker_count = 1;
  EventSink on_event;

  /// Throws InvalidInput when an invariant is violated.
  void validate() const;
};

/// Barycentric interpolation of vertex optimal values on a simplex.
class OverApproximator {
 public:
  OverApproximator(Eigen::MatrixXd vertices, Eigen::VectorXd values);

  const Eigen::MatrixXd& vertices() const { return vertices_; }
  const Eigen::VectorXd& values() const { return values_; }
  /// Throws PointOutside.
  double value(const Point& theta) const;
  /// Affine extension (no containment check).
  double extend(const Point& theta) const;

 private:
  Eigen::MatrixXd vertices_;
  Eigen::VectorXd values_;
  Eigen::VectorXd gradient_;
  double intercept_ = 0.0;
};

double over_approx_value(const OverApproximator& oa, const Point& theta);

enum class ErrorBoundStatus { Bounded, NoCompetitor, DenominatorDegenerate };

const char* to_string(ErrorBoundStatus s);

struct ErrorBounds {
  ErrorBoundStatus status = ErrorBoundStatus::NoCompetitor;
  double e_abs = -std::numeric_limits<double>::infinity();
  double e_rel = -std::numeric_limits<double>::infinity();
  Point arg_theta;
  std::optional<Commutation> arg_delta;
  /// Minimum of V*_delta over the cell (relative-error denominator).
  double denominator = 0.0;
  /// Competitors whose subproblem failed numerically; bounds are not
  /// trustworthy when nonzero.
  int unresolved = 0;
};

/// Maximum of (V(theta) - f(theta, x, delta')) over theta in co(face) and x
/// feasible for delta', as one conic program in (x, alpha).
struct CollapsedResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  double value = 0.0;  // the maximum
  Point theta;
  Eigen::VectorXd alpha;
};

CollapsedResult solve_collapsed(MixedIntegerOracle& oracle, const Commutation& delta,
                                const OverApproximator* oa, const Eigen::MatrixXd& face);

/// Vertex values of V*_delta; every vertex must be feasible.
OverApproximator build_over_approximator(MixedIntegerOracle& oracle, const Eigen::MatrixXd& vertices,
                                         const Commutation& delta);

ErrorBounds compute_error_bounds(MixedIntegerOracle& oracle, const Simplex& r,
                                 const Commutation& delta, const OverApproximator& oa,
                                 const std::vector<Commutation>& candidates,
                                 const Phase2Config& cfg);

Point constrained_split_point(MixedIntegerOracle& oracle, const Commutation& delta,
                              const OverApproximator& oa, const Eigen::MatrixXd& face_vertices);

/// Split point provider for the snap recursion: returns the point and its
/// affine weights in the face, or nullopt when no split point is available.
using SplitPointFn =
    std::function<std::optional<std::pair<Point, Eigen::VectorXd>>(const Eigen::MatrixXd& face)>;

/// Condition-number-aware split of a face (k vertex columns). Returns the
/// face alone when conditioning cannot be kept within rho_max.
std::vector<Eigen::MatrixXd> triangulate_snap_with(const Eigen::MatrixXd& face,
                                                   const SplitPointFn& split_point,
                                                   double rho_max, double keep_out);

std::vector<Simplex> triangulate_snap(MixedIntegerOracle& oracle, const OverApproximator& oa,
                                      const Simplex& r, const Commutation& delta,
                                      const Phase2Config& cfg, double keep_out = 0.0);

struct RefineResult {
  PartitionTree tree;
  std::vector<PartitionEvent> events;
  std::size_t iterations = 0;
  std::size_t reassignments = 0;
  double runtime_seconds = 0.0;
};

/// Refines a Phase I tree to an epsilon-suboptimal commutation map.
RefineResult refine_partition(PartitionTree tree, MixedIntegerOracle& oracle, const Phase2Config& cfg);

/// Per-leaf report: leaf,status,e_abs,e_rel,rho,depth,volume; then a summary.
void write_certification_csv(std::ostream& os, const PartitionTree& tree);

}  // namespace commutree
