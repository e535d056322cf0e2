#include "commutree/phase2.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <set>

#include "commutree/errors.hpp"
#include "work_stack.hpp"

namespace commutree {

void Phase2Config::validate() const {
  if (!(eps_abs > 0) && !(eps_rel > 0)) throw InvalidInput("eps_abs or eps_rel must be positive");
  if (eps_abs < 0 || eps_rel < 0) throw InvalidInput("error tolerances must be nonnegative");
  if (!(rho_max >= 1)) throw InvalidInput("rho_max must be at least 1");
  if (!(pi_abs >= 0)) throw InvalidInput("pi_abs must be nonnegative");
  if (!(pi_rel >= 0 && pi_rel < 0.5)) throw InvalidInput("pi_rel must lie in [0, 0.5)");
  if (!(denom_floor > 0)) throw InvalidInput("denom_floor must be positive");
  if (!(min_edge >= 0)) throw InvalidInput("min_edge must be nonnegative");
  if (max_iterations < 1) throw InvalidInput("max_iterations must be at least 1");
  if (worker_count < 1) throw InvalidInput("worker_count must be at least 1");
}

OverApproximator::OverApproximator(Eigen::MatrixXd vertices, Eigen::VectorXd values)
    : vertices_(std::move(vertices)), values_(std::move(values)) {
  const int p = static_cast<int>(vertices_.rows());
  const int k = static_cast<int>(vertices_.cols());
  if (values_.size() != k) throw InvalidInput("one value per vertex required");
  Eigen::MatrixXd m(k, p + 1);
  m.leftCols(p) = vertices_.transpose();
  m.col(p).setOnes();
  const Eigen::VectorXd sol = m.colPivHouseholderQr().solve(values_);
  gradient_ = sol.head(p);
  intercept_ = sol(p);
}

double OverApproximator::value(const Point& theta) const {
  const BarycentricCoords bc = barycentric_coordinates(Simplex(vertices_), theta);
  if (!bc.contains) throw PointOutside("point outside the over-approximator simplex");
  return bc.alpha.dot(values_);
}

double OverApproximator::extend(const Point& theta) const {
  return gradient_.dot(theta) + intercept_;
}

double over_approx_value(const OverApproximator& oa, const Point& theta) { return oa.value(theta); }

const char* to_string(ErrorBoundStatus s) {
  switch (s) {
    case ErrorBoundStatus::Bounded: return "bounded";
    case ErrorBoundStatus::NoCompetitor: return "no_competitor";
    case ErrorBoundStatus::DenominatorDegenerate: return "denominator_degenerate";
  }
  return "?";
}

CollapsedResult solve_collapsed(MixedIntegerOracle& oracle, const Commutation& delta,
                                const OverApproximator* oa, const Eigen::MatrixXd& face) {
  const ConicData d = oracle.program().instantiate(delta);
  const int n = d.n();
  const int l = static_cast<int>(face.cols());
  const int me = static_cast<int>(d.A_eq.rows());
  const int mc = static_cast<int>(d.G.rows());

  // Variables (x, alpha) with theta = face * alpha on the unit simplex.
  ConicProblem cp;
  cp.c.resize(n + l);
  cp.c.head(n) = d.c;
  cp.c.tail(l) = face.transpose() * d.c_theta;
  if (oa)
    for (int j = 0; j < l; ++j) cp.c(n + j) -= oa->extend(face.col(j));
  cp.c0 = d.c0;

  cp.A = Eigen::MatrixXd::Zero(me + 1, n + l);
  cp.A.topLeftCorner(me, n) = d.A_eq;
  if (me > 0) cp.A.block(0, n, me, l) = -d.B_eq * face;
  cp.A.block(me, n, 1, l).setOnes();
  cp.b.resize(me + 1);
  cp.b.head(me) = d.b_eq;
  cp.b(me) = 1.0;

  cp.G = Eigen::MatrixXd::Zero(mc + l, n + l);
  cp.G.topLeftCorner(mc, n) = d.G;
  if (mc > 0) cp.G.block(0, n, mc, l) = -d.H * face;
  cp.G.bottomRightCorner(l, l) = -Eigen::MatrixXd::Identity(l, l);
  cp.h = Eigen::VectorXd::Zero(mc + l);
  cp.h.head(mc) = d.h;
  cp.cone = d.cone;
  cp.cone.append(ConeFactor{ConeKind::NonnegOrthant, l});

  SolverSettings settings = oracle.options().solver;
  SolveOutcome out = solve(cp, settings);
  if (out.status == SolveStatus::NumericalFailure) {
    settings.equilibrate = !settings.equilibrate;
    out = solve(cp, settings);
  }
  CollapsedResult r;
  r.status = out.status;
  if (out.status == SolveStatus::Optimal) {
    r.value = oa ? -out.value : out.value;
    r.alpha = out.x.tail(l);
    r.theta = face * r.alpha;
  }
  return r;
}

OverApproximator build_over_approximator(MixedIntegerOracle& oracle, const Eigen::MatrixXd& vertices,
                                         const Commutation& delta) {
  Eigen::VectorXd values(vertices.cols());
  for (int j = 0; j < vertices.cols(); ++j) {
    const SolveOutcome o = oracle.solve_fixed(vertices.col(j), delta);
    if (!o.optimal())
      throw Error("assigned commutation " + delta.to_string() + " not solved at a cell vertex: " +
                  to_string(o.status));
    values(j) = o.value;
  }
  return OverApproximator(vertices, values);
}

ErrorBounds compute_error_bounds(MixedIntegerOracle& oracle, const Simplex& r,
                                 const Commutation& delta, const OverApproximator& oa,
                                 const std::vector<Commutation>& candidates,
                                 const Phase2Config& cfg) {
  ErrorBounds eb;
  bool any = false;
  for (const auto& cand : candidates) {
    if (cand == delta) continue;
    const CollapsedResult res = solve_collapsed(oracle, cand, &oa, r.vertices());
    if (res.status == SolveStatus::Infeasible) continue;
    if (res.status == SolveStatus::NumericalFailure) {
      ++eb.unresolved;
      continue;
    }
    any = true;
    const double v = res.status == SolveStatus::Unbounded
                         ? std::numeric_limits<double>::infinity()
                         : res.value;
    if (!eb.arg_delta || v > eb.e_abs) {
      eb.e_abs = v;
      eb.arg_delta = cand;
      eb.arg_theta = res.status == SolveStatus::Optimal ? res.theta : r.vertices().rowwise().mean();
    }
  }
  if (!any) {
    eb.status = ErrorBoundStatus::NoCompetitor;
    return eb;
  }
  const CollapsedResult den = solve_collapsed(oracle, delta, nullptr, r.vertices());
  if (den.status != SolveStatus::Optimal || den.value <= cfg.denom_floor) {
    eb.status = ErrorBoundStatus::DenominatorDegenerate;
    eb.denominator = den.status == SolveStatus::Optimal ? den.value : 0.0;
    eb.e_rel = std::numeric_limits<double>::infinity();
    return eb;
  }
  eb.status = ErrorBoundStatus::Bounded;
  eb.denominator = den.value;
  eb.e_rel = eb.e_abs / den.value;
  return eb;
}

namespace {

ErrorBounds merge(const ErrorBounds& a, const ErrorBounds& b) {
  if (a.status == ErrorBoundStatus::NoCompetitor) {
    ErrorBounds r = b;
    r.unresolved += a.unresolved;
    return r;
  }
  if (b.status == ErrorBoundStatus::NoCompetitor) {
    ErrorBounds r = a;
    r.unresolved += b.unresolved;
    return r;
  }
  ErrorBounds r = b.e_abs > a.e_abs ? b : a;
  r.unresolved = a.unresolved + b.unresolved;
  return r;
}

bool certifies(const ErrorBounds& eb, const Phase2Config& cfg) {
  if (eb.unresolved > 0) return false;
  if (eb.status == ErrorBoundStatus::NoCompetitor) return true;
  if (eb.e_abs <= cfg.eps_abs) return true;
  return eb.status == ErrorBoundStatus::Bounded && cfg.eps_rel > 0 && eb.e_rel <= cfg.eps_rel;
}

double max_rho(const std::vector<Simplex>& cells) {
  double m = 0.0;
  for (const auto& s : cells) {
    try {
      m = std::max(m, condition_number(s));
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  }
  return m;
}

enum class Action { Triangulate, Certify, OnlyFeasible, Split, Warn };

struct Input {
  Eigen::MatrixXd vertices;
  Commutation delta;
};

struct Decision {
  Action action = Action::Warn;
  double e_abs = std::numeric_limits<double>::quiet_NaN();
  double e_rel = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::pair<Eigen::MatrixXd, Commutation>> children;
  const char* reason = "";
};

class Refiner {
 public:
  Refiner(MixedIntegerOracle& oracle, const Phase2Config& cfg, RefineResult& out)
      : oracle_(oracle), cfg_(cfg), out_(out), start_(std::chrono::steady_clock::now()) {}

  void init() {
    auto& tree = out_.tree;
    for (const auto& c : tree.node(0).children) total_volume_ += node_volume(tree.node(c));
    const auto leaves = tree.leaves();
    for (NodeId id : leaves) {
      if (!tree.node(id).delta)
        throw InvalidInput("leaf " + std::to_string(id) + " carries no commutation");
      tree.node(id).status = NodeStatus::Open;
    }
    for (auto it = leaves.rbegin(); it != leaves.rend(); ++it) stack_.push_back(*it);
    emit({0, elapsed(), "init", total_volume_, 0.0, 0});
  }

  void run(int workers) {
    detail::run_work_stack<Input, Decision>(
        stack_, workers,
        [this](NodeId id) {
          if (out_.iterations >= cfg_.max_iterations)
            throw IterationCapExceeded("phase two exceeded " + std::to_string(cfg_.max_iterations) +
                                       " iterations");
          ++out_.iterations;
          const auto& n = out_.tree.node(id);
          return Input{n.vertices, *n.delta};
        },
        [this](const Input& in) { return decide(in); },
        [this](NodeId id, const Input& in, const Decision& d) { apply(id, in, d); });
  }

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  Decision decide(const Input& in) {
    Decision d;
    const int p = static_cast<int>(in.vertices.rows());
    if (in.vertices.cols() != p + 1) {
      d.action = Action::Triangulate;
      for (auto& s : delaunay_triangulate(Polytope(in.vertices)))
        d.children.emplace_back(s.vertices(), in.delta);
      return d;
    }
    const Simplex r(in.vertices);
    const OverApproximator oa = build_over_approximator(oracle_, in.vertices, in.delta);

    std::vector<Commutation> cached;
    for (auto& c : oracle_.cache().snapshot())
      if (c != in.delta && oracle_.program().admissible(c)) cached.push_back(c);
    ErrorBounds eb = compute_error_bounds(oracle_, r, in.delta, oa, cached, cfg_);
    if (certifies(eb, cfg_) && cfg_.full_candidate_sweep) {
      if (const auto* all = oracle_.admissible()) {
        const std::set<Commutation> seen(cached.begin(), cached.end());
        std::vector<Commutation> rest;
        for (const auto& c : *all)
          if (c != in.delta && !seen.count(c)) rest.push_back(c);
        eb = merge(eb, compute_error_bounds(oracle_, r, in.delta, oa, rest, cfg_));
      }
    }
    d.e_abs = eb.e_abs;
    d.e_rel = eb.e_rel;
    if (certifies(eb, cfg_)) {
      d.action = eb.status == ErrorBoundStatus::NoCompetitor ? Action::OnlyFeasible : Action::Certify;
      return d;
    }

    const LongestEdge le = longest_edge(in.vertices);
    if (le.length < cfg_.min_edge) {
      d.action = Action::Warn;
      d.reason = "min_edge";
      return d;
    }
    const double keep_out = std::max(cfg_.pi_abs, cfg_.pi_rel * le.length);
    std::vector<Simplex> cells;
    std::optional<Commutation> target = eb.arg_delta;
    if (target && eb.arg_theta.size() == p) {
      bool clear = true;
      for (int j = 0; j < in.vertices.cols(); ++j)
        if ((in.vertices.col(j) - eb.arg_theta).norm() <= keep_out) clear = false;
      if (clear) {
        auto snapped = triangulate_snap(oracle_, oa, r, *target, cfg_, keep_out);
        if (snapped.size() > 1) cells = std::move(snapped);
      }
    }
    if (cells.empty()) {
      auto [a, b] = bisect_longest_edge(r);
      cells = {a, b};
      if (max_rho(cells) > cfg_.rho_max) {
        d.action = Action::Warn;
        d.reason = "rho";
        return d;
      }
    }
    d.action = Action::Split;
    for (auto& s : cells) {
      Commutation cd = in.delta;
      if (target && *target != in.delta) {
        bool ok = true;
        for (int j = 0; j < s.vertices().cols() && ok; ++j)
          ok = oracle_.solve_fixed(s.vertex(j), *target).optimal();
        if (ok) cd = *target;
      }
      d.children.emplace_back(s.vertices(), cd);
    }
    return d;
  }

  void apply(NodeId id, const Input& in, const Decision& d) {
    auto& tree = out_.tree;
    const double vol = node_volume(tree.node(id));
    auto close = [&](NodeStatus st, const char* action) {
      auto& n = tree.node(id);
      n.status = st;
      n.e_abs = d.e_abs;
      n.e_rel = d.e_rel;
      closed_volume_ += vol;
      emit({out_.iterations, elapsed(), action, vol, closed_volume_ / total_volume_, id});
    };
    switch (d.action) {
      case Action::Certify: close(NodeStatus::CertifiedEpsSuboptimal, "certify"); return;
      case Action::OnlyFeasible: close(NodeStatus::OnlyFeasible, "only_feasible"); return;
      case Action::Warn: close(NodeStatus::WarnedIllConditioned, "warn"); return;
      case Action::Triangulate:
      case Action::Split: break;
    }
    std::vector<NodeId> kids;
    bool reassigned = false;
    for (const auto& [v, cd] : d.children) {
      kids.push_back(tree.add_child(id, v, NodeStatus::Open, cd));
      if (cd != in.delta) {
        ++out_.reassignments;
        reassigned = true;
      }
    }
    tree.node(id).delta = in.delta;
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack_.push_back(*it);
    const char* action = d.action == Action::Triangulate ? "triangulate"
                         : reassigned                    ? "split_reassign"
                                                         : "split";
    emit({out_.iterations, elapsed(), action, vol, closed_volume_ / total_volume_, id});
  }

  void emit(const PartitionEvent& e) {
    out_.events.push_back(e);
    if (cfg_.on_event) cfg_.on_event(e);
  }

  MixedIntegerOracle& oracle_;
  const Phase2Config& cfg_;
  RefineResult& out_;
  std::chrono::steady_clock::time_point start_;
  std::vector<NodeId> stack_;
  double total_volume_ = 0.0;
  double closed_volume_ = 0.0;
};

}  // namespace

RefineResult refine_partition(PartitionTree tree, MixedIntegerOracle& oracle, const Phase2Config& cfg) {
  cfg.validate();
  if (tree.p() != oracle.program().p()) throw InvalidInput("tree dimension differs from program p");
  RefineResult out;
  out.tree = std::move(tree);
  Refiner r(oracle, cfg, out);
  r.init();
  r.run(cfg.deterministic ? 1 : cfg.worker_count);
  out.runtime_seconds = r.elapsed();
  out.tree.refinement = RefinementRecord{cfg.eps_abs, cfg.eps_rel, cfg.rho_max,
                                         cfg.pi_abs,  cfg.pi_rel,  cfg.min_edge, out.iterations};
  return out;
}

void write_certification_csv(std::ostream& os, const PartitionTree& tree) {
  os << "leaf,status,e_abs,e_rel,rho,depth,volume\n";
  os << std::setprecision(12);
  double total = 0.0;
  double warned = 0.0;
  for (NodeId id : tree.leaves()) {
    const auto& n = tree.node(id);
    double rho = std::numeric_limits<double>::infinity();
    try {
      rho = face_condition_number(n.vertices);
    } catch (const Error&) {
    }
    const double vol = node_volume(n);
    total += vol;
    if (n.status == NodeStatus::WarnedIllConditioned) warned += vol;
    os << id << ',' << to_string(n.status) << ',' << n.e_abs << ',' << n.e_rel << ',' << rho << ','
       << n.depth << ',' << vol << '\n';
  }
  os << "summary,warned_volume_fraction," << (total > 0 ? warned / total : 0.0) << '\n';
}

}  // namespace commutree
