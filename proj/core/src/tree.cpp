#include "commutree/tree.hpp"

#include <cmath>
#include <map>
#include <ostream>

#include "commutree/errors.hpp"
#include "commutree/hexfloat.hpp"

namespace commutree {

const char* to_string(NodeStatus s) {
  switch (s) {
    case NodeStatus::Open: return "open";
    case NodeStatus::Internal: return "internal";
    case NodeStatus::ClosedFeasible: return "closed_feasible";
    case NodeStatus::CertifiedEpsSuboptimal: return "certified";
    case NodeStatus::OnlyFeasible: return "only_feasible";
    case NodeStatus::WarnedIllConditioned: return "warned";
  }
  return "?";
}

std::optional<NodeStatus> parse_node_status(const std::string& s) {
  for (auto st : {NodeStatus::Open, NodeStatus::Internal, NodeStatus::ClosedFeasible,
                  NodeStatus::CertifiedEpsSuboptimal, NodeStatus::OnlyFeasible,
                  NodeStatus::WarnedIllConditioned})
    if (s == to_string(st)) return st;
  return std::nullopt;
}

bool is_closed_leaf(NodeStatus s) {
  return s != NodeStatus::Open && s != NodeStatus::Internal;
}

PartitionTree::PartitionTree(Polytope theta, int m, ScalingTransform transform)
    : theta_(std::move(theta)), m_(m), transform_(std::move(transform)) {
  TreeNode root;
  root.id = 0;
  root.vertices = theta_.vertices();
  root.status = NodeStatus::Internal;
  nodes_.push_back(std::move(root));
}

NodeId PartitionTree::add_child(NodeId parent, Eigen::MatrixXd vertices, NodeStatus status,
                                std::optional<Commutation> delta) {
  TreeNode child;
  child.id = static_cast<NodeId>(nodes_.size());
  child.parent = parent;
  child.depth = node(parent).depth + 1;
  child.vertices = std::move(vertices);
  child.status = status;
  child.delta = std::move(delta);
  node(parent).children.push_back(child.id);
  node(parent).status = NodeStatus::Internal;
  nodes_.push_back(std::move(child));
  return nodes_.back().id;
}

std::vector<NodeId> PartitionTree::leaves() const {
  std::vector<NodeId> out;
  if (nodes_.empty()) return out;
  std::vector<NodeId> stack{0};
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    const auto& n = node(id);
    if (n.is_leaf()) {
      if (id != 0) out.push_back(id);
      continue;
    }
    for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

int PartitionTree::max_depth() const {
  int d = 0;
  for (const auto& n : nodes_) d = std::max(d, n.depth);
  return d;
}

int PartitionTree::max_arity_below_first_layer() const {
  int a = 2;
  for (const auto& n : nodes_)
    if (n.id != 0) a = std::max(a, static_cast<int>(n.children.size()));
  return a;
}

QueryResult query(const PartitionTree& tree, const Point& theta) {
  if (theta.size() != tree.p()) throw InvalidInput("query point dimension differs from p");
  const int cost = tree.p() + 1;
  QueryResult r;
  const TreeNode* cur = &tree.node(tree.root());
  bool found = false;
  for (NodeId c : cur->children) {
    r.membership_tests += cost;
    if (simplex_contains(Simplex(tree.node(c).vertices), theta)) {
      cur = &tree.node(c);
      found = true;
      break;
    }
  }
  if (!found) throw OutsideTheta("point lies outside the parameter set");
  while (!cur->is_leaf()) {
    const TreeNode* next = &tree.node(cur->children.back());
    for (std::size_t k = 0; k + 1 < cur->children.size(); ++k) {
      const TreeNode& child = tree.node(cur->children[k]);
      r.membership_tests += cost;
      if (simplex_contains(Simplex(child.vertices), theta)) {
        next = &child;
        break;
      }
    }
    cur = next;
  }
  r.leaf = cur->id;
  r.delta = cur->delta;
  r.status = cur->status;
  return r;
}

QueryResult query_unscaled(const PartitionTree& tree, const Point& theta) {
  return query(tree, tree.transform().apply(theta));
}

NodeId linear_scan(const PartitionTree& tree, const Point& theta) {
  for (NodeId id : tree.leaves())
    if (simplex_contains(Simplex(tree.node(id).vertices), theta)) return id;
  return kNoNode;
}

int query_cost_bound(const PartitionTree& tree) {
  const int tau = tree.max_depth();
  const int a = tree.max_arity_below_first_layer();
  return (tree.p() + 1) * (tree.first_layer_count() + std::max(0, tau - 1) * (a - 1));
}

double node_volume(const TreeNode& node) {
  if (node.is_simplex()) return simplex_volume(Simplex(node.vertices));
  return polytope_volume(Polytope(node.vertices));
}

TreeStats statistics(const PartitionTree& tree, const std::optional<CellCountModel>& model) {
  TreeStats st;
  const auto leaves = tree.leaves();
  st.leaves = leaves.size();
  st.max_depth = tree.max_depth();
  st.max_depth_below_first_layer = std::max(0, st.max_depth - 1);
  st.nodes = tree.size() - 1;
  st.first_layer = tree.first_layer_count();
  st.iterations = tree.phase1_iterations + (tree.refinement ? tree.refinement->iterations : 0);

  std::map<NodeStatus, double> vol;
  for (NodeId id : leaves) {
    const auto& n = tree.node(id);
    const double v = node_volume(n);
    vol[n.status] += v;
    st.volume += v;
    if (n.is_simplex())
      st.max_condition_number = std::max(st.max_condition_number, condition_number(Simplex(n.vertices)));
  }
  for (const auto& [status, v] : vol) {
    st.status_volume_fraction.emplace_back(status, st.volume > 0 ? v / st.volume : 0.0);
    if (status == NodeStatus::WarnedIllConditioned) st.warned_volume_fraction = v / st.volume;
  }
  if (model) {
    const double fitted = model->predict_log2(tree.p());
    const double actual = std::log2(static_cast<double>(std::max<std::size_t>(st.leaves, 1)));
    double k = 1.0;
    if (fitted > 0) k = std::exp(-actual / fitted);
    st.kappa_hat = std::clamp(k, std::numeric_limits<double>::min(), 1.0);
  }
  return st;
}

void write_stats_csv(std::ostream& os, const TreeStats& s) {
  os << "leaves,max_depth,max_depth_below_first_layer,nodes,first_layer,iterations,runtime_s,"
        "volume,frac_closed_feasible,frac_certified,frac_only_feasible,frac_warned,frac_open,"
        "max_rho,kappa_hat\n";
  auto frac = [&](NodeStatus st) {
    for (const auto& [k, v] : s.status_volume_fraction)
      if (k == st) return v;
    return 0.0;
  };
  os.precision(17);
  os << s.leaves << ',' << s.max_depth << ',' << s.max_depth_below_first_layer << ',' << s.nodes
     << ',' << s.first_layer << ',' << s.iterations << ',' << s.runtime_seconds << ',' << s.volume
     << ',' << frac(NodeStatus::ClosedFeasible) << ',' << frac(NodeStatus::CertifiedEpsSuboptimal)
     << ',' << frac(NodeStatus::OnlyFeasible) << ',' << frac(NodeStatus::WarnedIllConditioned)
     << ',' << frac(NodeStatus::Open) << ',' << s.max_condition_number << ',';
  if (s.kappa_hat)
    os << *s.kappa_hat;
  else
    os << "nan";
  os << '\n';
}

}  // namespace commutree
