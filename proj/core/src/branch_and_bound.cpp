// Best-first branch-and-bound on the affine-in-delta encoding, relaxing
// delta to [0,1]^m with the one-hot equalities kept.

#include <cmath>
#include <functional>
#include <limits>
#include <queue>

#include "commutree/errors.hpp"
#include "commutree/mi_solver.hpp"

namespace commutree::detail {

namespace {

struct Node {
  double bound;
  int depth;
  int id;
  std::vector<signed char> fixed;  // -1 free, 0, 1
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.id > b.id;
  }
};

/// Relaxation over stacked copies (x_1..x_k, delta).
ConicProblem relaxation(const MixedEncoding& enc, const std::vector<OneHotGroup>& groups,
                        const Eigen::MatrixXd& points, bool minimize,
                        const std::optional<Commutation>& exclude,
                        const std::vector<signed char>& fixed) {
  const ConicData& d = enc.base;
  const int n = d.n();
  const int m = static_cast<int>(fixed.size());
  const int k = static_cast<int>(points.cols());
  const int pe = static_cast<int>(d.A_eq.rows());
  const int dc = static_cast<int>(d.G.rows());
  const int nv = k * n + m;

  int n_fixed = 0;
  for (auto f : fixed) n_fixed += f >= 0;
  const int n_free = m - n_fixed;
  const int eq_rows = k * pe + static_cast<int>(groups.size()) + n_fixed;
  const int box_rows = 2 * n_free + (exclude ? 1 : 0);

  ConicProblem pr;
  pr.c = Eigen::VectorXd::Zero(nv);
  pr.A = Eigen::MatrixXd::Zero(eq_rows, nv);
  pr.b = Eigen::VectorXd::Zero(eq_rows);
  pr.G = Eigen::MatrixXd::Zero(box_rows + k * dc, nv);
  pr.h = Eigen::VectorXd::Zero(box_rows + k * dc);
  if (minimize) {
    pr.c.head(n) = d.c;
    pr.c.tail(m) = enc.c_delta;
    pr.c0 = d.c0 + d.c_theta.dot(points.col(0));
  }
  int r = 0;
  for (int i = 0; i < k; ++i) {
    pr.A.block(r, i * n, pe, n) = d.A_eq;
    pr.A.block(r, k * n, pe, m) = enc.A_delta;
    pr.b.segment(r, pe) = d.b_eq + d.B_eq * points.col(i);
    r += pe;
  }
  for (const auto& g : groups) {
    for (int bit : g.bits) pr.A(r, k * n + bit) = 1.0;
    pr.b(r++) = 1.0;
  }
  for (int j = 0; j < m; ++j) {
    if (fixed[j] < 0) continue;
    pr.A(r, k * n + j) = 1.0;
    pr.b(r++) = fixed[j];
  }
  int g = 0;
  for (int j = 0; j < m; ++j) {
    if (fixed[j] >= 0) continue;
    pr.G(g, k * n + j) = -1.0;  // delta >= 0
    pr.h(g++) = 0.0;
    pr.G(g, k * n + j) = 1.0;  // 1 - delta >= 0
    pr.h(g++) = 1.0;
  }
  if (exclude) {
    double ones = 0.0;
    for (int j = 0; j < m; ++j) {
      if ((*exclude)[j]) {
        pr.G(g, k * n + j) = 1.0;
        ones += 1.0;
      } else {
        pr.G(g, k * n + j) = -1.0;
      }
    }
    pr.h(g++) = ones - 1.0;
  }
  pr.cone.append({ConeKind::NonnegOrthant, box_rows});
  for (int i = 0; i < k; ++i) {
    pr.G.block(g, i * n, dc, n) = d.G;
    pr.G.block(g, k * n, dc, m) = enc.G_delta;
    pr.h.segment(g, dc) = d.h + d.H * points.col(i);
    g += dc;
    pr.cone.append(d.cone);
  }
  return pr;
}

}  // namespace

BnbResult branch_and_bound(const ParametricProgram& prog, const Eigen::MatrixXd& points,
                           bool minimize, const std::optional<Commutation>& exclude,
                           const std::vector<Commutation>& seeds, const SolverSettings& solver,
                           const std::function<SolveOutcome(const Point&, const Commutation&)>& fixed,
                           std::uint64_t node_budget) {
  if (!prog.mixed()) throw InvalidInput("branch-and-bound needs an affine commutation encoding");
  const MixedEncoding& enc = *prog.mixed();
  const int m = prog.m();
  BnbResult res;

  // Integral candidate check through the exact fixed-commutation solves.
  auto evaluate = [&](const Commutation& d, double& value) {
    if (!prog.admissible(d) || (exclude && d == *exclude)) return false;
    value = 0.0;
    for (int i = 0; i < points.cols(); ++i) {
      const SolveOutcome o = fixed(points.col(i), d);
      if (!o.optimal()) return false;
      value = o.value;
    }
    return true;
  };

  double incumbent = std::numeric_limits<double>::infinity();
  for (const auto& d : seeds) {
    double v;
    if (!evaluate(d, v)) continue;
    if (!minimize) {
      res.status = MinlpStatus::Optimal;
      res.delta = d;
      return res;
    }
    if (v < incumbent) {
      incumbent = v;
      res.delta = d;
      res.status = MinlpStatus::Optimal;
    }
  }

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  int next_id = 0;
  open.push({-std::numeric_limits<double>::infinity(), 0, next_id++,
             std::vector<signed char>(m, -1)});
  while (!open.empty()) {
    if (static_cast<std::uint64_t>(res.nodes) >= node_budget) {
      if (res.status != MinlpStatus::Optimal || minimize) res.status = MinlpStatus::Exhausted;
      return res;
    }
    Node node = open.top();
    open.pop();
    if (minimize && node.bound >= incumbent - 1e-9) continue;
    ++res.nodes;
    const SolveOutcome rel =
        solve(relaxation(enc, prog.groups(), points, minimize, exclude, node.fixed), solver);
    if (rel.status == SolveStatus::Infeasible) continue;

    int branch_bit = -1;
    double bound = node.bound;
    if (rel.optimal()) {
      bound = minimize ? rel.value : 0.0;
      if (minimize && bound >= incumbent - 1e-9) continue;
      const Eigen::VectorXd dv = rel.x.tail(m);
      double most = 1e-6;
      for (int j = 0; j < m; ++j) {
        if (node.fixed[j] >= 0) continue;
        const double frac = std::min(dv(j), 1.0 - dv(j));
        if (frac > most) {
          most = frac;
          branch_bit = j;
        }
      }
      if (branch_bit < 0) {
        Commutation cand = Commutation::zeros(m);
        for (int j = 0; j < m; ++j)
          cand.set(j, node.fixed[j] >= 0 ? node.fixed[j] == 1 : dv(j) > 0.5);
        double v;
        if (evaluate(cand, v)) {
          if (!minimize) {
            res.status = MinlpStatus::Optimal;
            res.delta = cand;
            return res;
          }
          if (v < incumbent) {
            incumbent = v;
            res.delta = cand;
            res.status = MinlpStatus::Optimal;
          }
          continue;
        }
      }
    }
    if (branch_bit < 0) {
      for (int j = 0; j < m; ++j)
        if (node.fixed[j] < 0) {
          branch_bit = j;
          break;
        }
    }
    if (branch_bit < 0) continue;  // fully fixed and not feasible
    for (int v : {1, 0}) {
      Node child{bound, node.depth + 1, next_id++, node.fixed};
      child.fixed[branch_bit] = static_cast<signed char>(v);
      open.push(std::move(child));
    }
  }
  if (res.status != MinlpStatus::Optimal) res.status = MinlpStatus::Infeasible;
  return res;
}

}  // namespace commutree::detail
