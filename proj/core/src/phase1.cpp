#include "commutree/phase1.hpp"

#include <chrono>
#include <cmath>

#include "commutree/errors.hpp"
#include "work_stack.hpp"

namespace commutree {

void Phase1Config::validate() const {
  if (max_iterations < 1) throw InvalidInput("max_iterations must be at least 1");
  if (worker_count < 1) throw InvalidInput("worker_count must be at least 1");
}

int estimate_depth_bound(double l0, double kappa, int p) {
  if (!(kappa > 0)) throw InvalidInput("overlap kappa must be positive");
  if (!(l0 > 0)) throw InvalidInput("edge length l0 must be positive");
  if (p < 1) throw InvalidInput("dimension p must be positive");
  const double v = 0.5 * p * (p + 1) * std::log2(l0 / kappa);
  return std::max(0, static_cast<int>(std::ceil(v - 1e-12)));
}

namespace {

enum class Action { Close, Split };

struct Decision {
  Action action = Action::Split;
  Commutation delta;
};

/// Barycenter check then (V^R) for one open leaf; no tree access.
Decision decide(MixedIntegerOracle& oracle, const Eigen::MatrixXd& vertices) {
  const Point bary = vertices.rowwise().mean();
  const MinlpResult at_bary = oracle.find_feasible(bary);
  if (at_bary.status == MinlpStatus::Infeasible) throw ThetaExceedsFeasibleSet(bary);
  if (at_bary.status == MinlpStatus::Exhausted)
    throw Error("commutation search budget exhausted at a barycenter");
  const CommonFeasibleResult common = oracle.find_common_feasible(vertices);
  if (common.status == MinlpStatus::Exhausted)
    throw Error("commutation search budget exhausted in the common-feasibility search");
  if (common.status == MinlpStatus::Optimal) return {Action::Close, common.delta};
  return {Action::Split, {}};
}

class Builder {
 public:
  Builder(MixedIntegerOracle& oracle, const Phase1Config& cfg, PartitionResult& out)
      : oracle_(oracle), cfg_(cfg), out_(out), start_(std::chrono::steady_clock::now()) {}

  void init(const Polytope& theta) {
    for (auto& s : delaunay_triangulate(theta)) {
      total_volume_ += simplex_volume(s);
      out_.tree.add_child(0, s.vertices());
    }
    const auto& first = out_.tree.node(0).children;
    for (auto it = first.rbegin(); it != first.rend(); ++it) stack_.push_back(*it);
    emit({0, elapsed(), "init", total_volume_, 0.0, 0});
  }

  void run(int workers) {
    detail::run_work_stack<Eigen::MatrixXd, Decision>(
        stack_, workers,
        [this](NodeId id) {
          if (out_.iterations >= cfg_.max_iterations)
            throw IterationCapExceeded("phase one exceeded " + std::to_string(cfg_.max_iterations) +
                                       " iterations");
          ++out_.iterations;
          return out_.tree.node(id).vertices;
        },
        [this](const Eigen::MatrixXd& v) { return decide(oracle_, v); },
        [this](NodeId id, const Eigen::MatrixXd& v, const Decision& d) { apply(id, v, d); });
  }

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  void apply(NodeId id, const Eigen::MatrixXd& vertices, const Decision& d) {
    auto& tree = out_.tree;
    const double vol = simplex_volume(Simplex(vertices));
    if (d.action == Action::Close) {
      tree.node(id).status = NodeStatus::ClosedFeasible;
      tree.node(id).delta = d.delta;
      closed_volume_ += vol;
      emit({out_.iterations, elapsed(), "close", vol, closed_volume_ / total_volume_, id});
      return;
    }
    auto [a, b] = bisect_longest_edge(Simplex(vertices));
    const NodeId ca = tree.add_child(id, a.vertices());
    const NodeId cb = tree.add_child(id, b.vertices());
    stack_.push_back(cb);
    stack_.push_back(ca);
    emit({out_.iterations, elapsed(), "split", vol, closed_volume_ / total_volume_, id});
  }

  void emit(const PartitionEvent& e) {
    out_.events.push_back(e);
    if (cfg_.on_event) cfg_.on_event(e);
  }

  MixedIntegerOracle& oracle_;
  const Phase1Config& cfg_;
  PartitionResult& out_;
  std::chrono::steady_clock::time_point start_;
  std::vector<NodeId> stack_;
  double total_volume_ = 0.0;
  double closed_volume_ = 0.0;
};

}  // namespace

PartitionResult build_partition(MixedIntegerOracle& oracle, const Polytope& theta,
                                const Phase1Config& cfg, const ScalingTransform& transform) {
  cfg.validate();
  const int p = theta.dim();
  if (p != oracle.program().p()) throw InvalidInput("parameter set dimension differs from program p");
  if (!is_full_dimensional(theta.vertices())) throw DegenerateInput("parameter set is not full-dimensional");
  PartitionResult out;
  out.tree = PartitionTree(theta, oracle.program().m(),
                           transform.scale.size() == p ? transform : ScalingTransform::identity(p));
  Builder b(oracle, cfg, out);
  b.init(theta);
  b.run(cfg.deterministic ? 1 : cfg.worker_count);
  out.tree.phase1_iterations = out.iterations;
  out.runtime_seconds = b.elapsed();
  return out;
}

}  // namespace commutree
