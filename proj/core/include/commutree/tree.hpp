#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "commutree/geometry.hpp"
#include "commutree/problem.hpp"

namespace commutree {

using NodeId = int;
inline constexpr NodeId kNoNode = -1;

enum class NodeStatus {
  Open,
  Internal,
  ClosedFeasible,
  CertifiedEpsSuboptimal,
  OnlyFeasible,
  WarnedIllConditioned,
};

const char* to_string(NodeStatus s);
std::optional<NodeStatus> parse_node_status(const std::string& s);
bool is_closed_leaf(NodeStatus s);

struct TreeNode {
  NodeId id = kNoNode;
  NodeId parent = kNoNode;
  int depth = 0;
  Eigen::MatrixXd vertices;  // p x k; a simplex when k = p + 1
  NodeStatus status = NodeStatus::Open;
  std::optional<Commutation> delta;
  double e_abs = std::numeric_limits<double>::quiet_NaN();
  double e_rel = std::numeric_limits<double>::quiet_NaN();
  std::vector<NodeId> children;

  bool is_leaf() const { return children.empty(); }
  bool is_simplex() const { return vertices.cols() == vertices.rows() + 1; }
};

/// Settings recorded alongside a refined tree (echoed in the file header).
struct RefinementRecord {
  double eps_abs = 0.0;
  double eps_rel = 0.0;
  double rho_max = 0.0;
  double pi_abs = 0.0;
  double pi_rel = 0.0;
  double min_edge = 0.0;
  std::size_t iterations = 0;
};

/// Partition tree: node 0 is the root region Theta, its children are the
/// Delaunay layer, and descendants come from bisection or snap splits.
/// Single writer while building; safe for concurrent queries afterwards.
class PartitionTree {
 public:
  PartitionTree() = default;
  PartitionTree(Polytope theta, int m, ScalingTransform transform);

  int p() const { return theta_.dim(); }
  int m() const { return m_; }
  const Polytope& theta() const { return theta_; }
  const ScalingTransform& transform() const { return transform_; }

  NodeId root() const { return 0; }
  std::size_t size() const { return nodes_.size(); }
  const TreeNode& node(NodeId id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  TreeNode& node(NodeId id) { return nodes_.at(static_cast<std::size_t>(id)); }
  const std::vector<TreeNode>& nodes() const { return nodes_; }

  NodeId add_child(NodeId parent, Eigen::MatrixXd vertices, NodeStatus status = NodeStatus::Open,
                   std::optional<Commutation> delta = std::nullopt);

  /// Leaves in depth-first, stored-child order.
  std::vector<NodeId> leaves() const;
  int first_layer_count() const { return static_cast<int>(nodes_.front().children.size()); }
  int max_depth() const;
  int max_arity_below_first_layer() const;

  std::size_t phase1_iterations = 0;
  std::optional<RefinementRecord> refinement;

 private:
  Polytope theta_;
  int m_ = 0;
  ScalingTransform transform_;
  std::vector<TreeNode> nodes_;
};

struct QueryResult {
  NodeId leaf = kNoNode;
  std::optional<Commutation> delta;
  NodeStatus status = NodeStatus::Open;
  /// Inequality evaluations: p+1 per simplex membership test.
  int membership_tests = 0;
};

/// Point location in tree coordinates. Throws OutsideTheta.
QueryResult query(const PartitionTree& tree, const Point& theta);

/// Point location for a point in the original (unscaled) coordinates.
QueryResult query_unscaled(const PartitionTree& tree, const Point& theta);

/// First leaf (depth-first order) whose simplex contains theta.
NodeId linear_scan(const PartitionTree& tree, const Point& theta);

/// Upper bound on query cost: (p+1)(eta_o + (tau-1)(a-1)), with a the largest
/// arity below the first layer; equals (p+1)(eta_o + tau) - (p+1) for a
/// binary tree.
int query_cost_bound(const PartitionTree& tree);

/// Leaf-count model log2(eta) = slope * p^2 + intercept.
struct CellCountModel {
  double slope = 0.0;
  double intercept = 0.0;
  double predict_log2(int p) const { return slope * p * p + intercept; }
};

struct TreeStats {
  std::size_t leaves = 0;
  int max_depth = 0;
  int max_depth_below_first_layer = 0;
  std::size_t nodes = 0;  // excluding the root
  int first_layer = 0;
  std::size_t iterations = 0;
  double runtime_seconds = 0.0;
  double volume = 0.0;
  std::vector<std::pair<NodeStatus, double>> status_volume_fraction;
  double warned_volume_fraction = 0.0;
  double max_condition_number = 0.0;
  std::optional<double> kappa_hat;
};

TreeStats statistics(const PartitionTree& tree, const std::optional<CellCountModel>& model = {});

/// Volume of a node region (Delaunay volume for non-simplices).
double node_volume(const TreeNode& node);

void write_stats_csv(std::ostream& os, const TreeStats& stats);

}  // namespace commutree
