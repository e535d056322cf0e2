// Homogeneous self-dual embedding interior point method with Nesterov-Todd
// scaling and Mehrotra predictor-corrector, for products of nonnegative
// orthants and second-order cones. Dense linear algebra throughout; problem
// sizes here are at most a few hundred rows.

#include "commutree/conic_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "commutree/errors.hpp"

namespace commutree {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::NumericalFailure: return "numerical_failure";
  }
  return "?";
}

void ConicProblem::normalize() {
  const auto n = c.size();
  if (A.size() == 0) A.resize(b.size(), n);
  if (G.size() == 0) G.resize(h.size(), n);
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Block {
  ConeKind kind;
  int start;
  int size;
};

class Cones {
 public:
  explicit Cones(const ConeSpec& spec) {
    int row = 0;
    for (const auto& f : spec.factors()) {
      if (f.kind == ConeKind::Zero) throw InvalidInput("zero cone rows must be equalities here");
      if (f.kind == ConeKind::NonnegOrthant) {
        for (int k = 0; k < f.size; ++k) blocks_.push_back({f.kind, row + k, 1});
      } else {
        blocks_.push_back({f.kind, row, f.size});
      }
      row += f.size;
    }
    dim_ = row;
  }

  int dim() const { return dim_; }
  int degree() const { return static_cast<int>(blocks_.size()); }
  const std::vector<Block>& blocks() const { return blocks_; }

  double min_eig(const VectorXd& v) const {
    double m = kInf;
    for (const auto& b : blocks_) {
      if (b.size == 1)
        m = std::min(m, v(b.start));
      else
        m = std::min(m, v(b.start) - v.segment(b.start + 1, b.size - 1).norm());
    }
    return m;
  }

  void add_identity(VectorXd& v, double t) const {
    for (const auto& b : blocks_) v(b.start) += t;
  }

  VectorXd identity() const {
    VectorXd e = VectorXd::Zero(dim_);
    add_identity(e, 1.0);
    return e;
  }

  VectorXd product(const VectorXd& u, const VectorXd& v) const {
    VectorXd w(dim_);
    for (const auto& b : blocks_) {
      if (b.size == 1) {
        w(b.start) = u(b.start) * v(b.start);
      } else {
        const auto u1 = u.segment(b.start + 1, b.size - 1);
        const auto v1 = v.segment(b.start + 1, b.size - 1);
        w(b.start) = u.segment(b.start, b.size).dot(v.segment(b.start, b.size));
        w.segment(b.start + 1, b.size - 1) = u(b.start) * v1 + v(b.start) * u1;
      }
    }
    return w;
  }

  /// Solves lambda o u = d for u.
  VectorXd divide(const VectorXd& lambda, const VectorXd& d) const {
    VectorXd u(dim_);
    for (const auto& b : blocks_) {
      if (b.size == 1) {
        u(b.start) = d(b.start) / lambda(b.start);
      } else {
        const double l0 = lambda(b.start);
        const auto l1 = lambda.segment(b.start + 1, b.size - 1);
        const double d0 = d(b.start);
        const auto d1 = d.segment(b.start + 1, b.size - 1);
        const double det = l0 * l0 - l1.squaredNorm();
        const double u0 = (l0 * d0 - l1.dot(d1)) / det;
        u(b.start) = u0;
        u.segment(b.start + 1, b.size - 1) = (d1 - u0 * l1) / l0;
      }
    }
    return u;
  }

  /// Largest alpha in [0, cap] with v + alpha dv in the cone.
  double max_step(const VectorXd& v, const VectorXd& dv, double cap) const {
    double alpha = cap;
    for (const auto& b : blocks_) {
      if (b.size == 1) {
        if (dv(b.start) < 0) alpha = std::min(alpha, -v(b.start) / dv(b.start));
        continue;
      }
      const double x0 = v(b.start);
      const double d0 = dv(b.start);
      const auto x1 = v.segment(b.start + 1, b.size - 1);
      const auto d1 = dv.segment(b.start + 1, b.size - 1);
      const double qa = d0 * d0 - d1.squaredNorm();
      const double qb = 2.0 * (x0 * d0 - x1.dot(d1));
      const double qc = std::max(0.0, x0 * x0 - x1.squaredNorm());
      double root = kInf;
      if (std::fabs(qa) < 1e-300) {
        if (qb < 0) root = -qc / qb;
      } else {
        const double disc = qb * qb - 4.0 * qa * qc;
        if (disc >= 0) {
          const double sq = std::sqrt(disc);
          const double q = -0.5 * (qb + (qb >= 0 ? sq : -sq));
          const double r1 = q / qa;
          const double r2 = q != 0.0 ? qc / q : kInf;
          for (double r : {r1, r2})
            if (r > 0 && r < root) root = r;
        }
      }
      if (d0 < 0) root = std::min(root, -x0 / d0);
      alpha = std::min(alpha, root);
    }
    return std::max(0.0, alpha);
  }

  /// Nesterov-Todd scaling: W, W^{-1}, with W z = W^{-1} s = lambda.
  void nt_scaling(const VectorXd& s, const VectorXd& z, MatrixXd& W, MatrixXd& Winv) const {
    W.setZero(dim_, dim_);
    Winv.setZero(dim_, dim_);
    for (const auto& b : blocks_) {
      if (b.size == 1) {
        const double w = std::sqrt(s(b.start) / z(b.start));
        W(b.start, b.start) = w;
        Winv(b.start, b.start) = 1.0 / w;
        continue;
      }
      const int k = b.size;
      const VectorXd sb = s.segment(b.start, k);
      const VectorXd zb = z.segment(b.start, k);
      const double sres = sb(0) * sb(0) - sb.tail(k - 1).squaredNorm();
      const double zres = zb(0) * zb(0) - zb.tail(k - 1).squaredNorm();
      const double snorm = std::sqrt(std::max(sres, 1e-300));
      const double znorm = std::sqrt(std::max(zres, 1e-300));
      const VectorXd sbar = sb / snorm;
      const VectorXd zbar = zb / znorm;
      const double gamma = std::sqrt(std::max(0.5 * (1.0 + sbar.dot(zbar)), 1e-300));
      VectorXd wbar(k);
      wbar(0) = (sbar(0) + zbar(0)) / (2.0 * gamma);
      wbar.tail(k - 1) = (sbar.tail(k - 1) - zbar.tail(k - 1)) / (2.0 * gamma);
      const double eta = std::sqrt(snorm / znorm);
      const double w0 = wbar(0);
      const VectorXd w1 = wbar.tail(k - 1);
      MatrixXd blk(k, k);
      blk(0, 0) = w0;
      blk.block(0, 1, 1, k - 1) = w1.transpose();
      blk.block(1, 0, k - 1, 1) = w1;
      blk.block(1, 1, k - 1, k - 1) =
          MatrixXd::Identity(k - 1, k - 1) + w1 * w1.transpose() / (1.0 + w0);
      W.block(b.start, b.start, k, k) = eta * blk;
      blk.block(0, 1, 1, k - 1) *= -1.0;
      blk.block(1, 0, k - 1, 1) *= -1.0;
      Winv.block(b.start, b.start, k, k) = blk / eta;
    }
  }

 private:
  std::vector<Block> blocks_;
  int dim_ = 0;
};

/// Ruiz equilibration of [A; G] with uniform scaling inside SOC blocks.
struct Equilibration {
  VectorXd D;   // columns
  VectorXd Ea;  // equality rows
  VectorXd Eg;  // cone rows
};

Equilibration equilibrate(const MatrixXd& A, const MatrixXd& G, const Cones& cones, bool enabled) {
  Equilibration eq{VectorXd::Ones(A.cols()), VectorXd::Ones(A.rows()), VectorXd::Ones(G.rows())};
  if (!enabled) return eq;
  MatrixXd As = A;
  MatrixXd Gs = G;
  auto inv_sqrt = [](double v) { return v > 1e-300 ? 1.0 / std::sqrt(v) : 1.0; };
  for (int pass = 0; pass < 10; ++pass) {
    VectorXd dc(A.cols());
    for (int j = 0; j < A.cols(); ++j) {
      double m = 0.0;
      if (As.rows()) m = As.col(j).cwiseAbs().maxCoeff();
      if (Gs.rows()) m = std::max(m, Gs.col(j).cwiseAbs().maxCoeff());
      dc(j) = inv_sqrt(m);
    }
    VectorXd da(A.rows());
    for (int i = 0; i < A.rows(); ++i) da(i) = A.cols() ? inv_sqrt(As.row(i).cwiseAbs().maxCoeff()) : 1.0;
    VectorXd dg(G.rows());
    for (const auto& b : cones.blocks()) {
      const double m = A.cols() ? Gs.middleRows(b.start, b.size).cwiseAbs().maxCoeff() : 0.0;
      dg.segment(b.start, b.size).setConstant(inv_sqrt(m));
    }
    As = da.asDiagonal() * As * dc.asDiagonal();
    Gs = dg.asDiagonal() * Gs * dc.asDiagonal();
    eq.D = eq.D.cwiseProduct(dc);
    eq.Ea = eq.Ea.cwiseProduct(da);
    eq.Eg = eq.Eg.cwiseProduct(dg);
  }
  return eq;
}

class KktSolver {
 public:
  KktSolver(const MatrixXd& A, const MatrixXd& G) : A_(A), G_(G) {}

  void factor(const MatrixXd& W2) {
    const int n = static_cast<int>(A_.cols());
    const int pe = static_cast<int>(A_.rows());
    const int d = static_cast<int>(G_.rows());
    K_.setZero(n + pe + d, n + pe + d);
    K_.block(0, n, n, pe) = A_.transpose();
    K_.block(0, n + pe, n, d) = G_.transpose();
    K_.block(n, 0, pe, n) = A_;
    K_.block(n + pe, 0, d, n) = G_;
    K_.block(n + pe, n + pe, d, d) = -W2;
    MatrixXd Kreg = K_;
    const double reg = 1e-9;
    for (int i = 0; i < n; ++i) Kreg(i, i) += reg;
    for (int i = n; i < n + pe + d; ++i) Kreg(i, i) -= reg;
    lu_.compute(Kreg);
  }

  VectorXd solve(const VectorXd& rhs) const {
    VectorXd x = lu_.solve(rhs);
    for (int k = 0; k < 3; ++k) {
      const VectorXd r = rhs - K_ * x;
      if (r.lpNorm<Eigen::Infinity>() <= 1e-14 * (1.0 + rhs.lpNorm<Eigen::Infinity>())) break;
      x += lu_.solve(r);
    }
    return x;
  }

 private:
  const MatrixXd& A_;
  const MatrixXd& G_;
  MatrixXd K_;
  Eigen::PartialPivLU<MatrixXd> lu_;
};

double safe_norm(const VectorXd& v) { return v.size() ? v.norm() : 0.0; }

}  // namespace

namespace detail {

SolveOutcome solve_hsde(const ConicProblem& prob, const SolverSettings& st) {
  const Cones cones(prob.cone);
  const int n = prob.n();
  const int pe = static_cast<int>(prob.A.rows());
  const int d = cones.dim();
  SolveOutcome out;

  const Equilibration eqs = equilibrate(prob.A, prob.G, cones, st.equilibrate);
  const MatrixXd A = eqs.Ea.asDiagonal() * prob.A * eqs.D.asDiagonal();
  const MatrixXd G = eqs.Eg.asDiagonal() * prob.G * eqs.D.asDiagonal();
  const VectorXd b = eqs.Ea.cwiseProduct(prob.b);
  const VectorXd h = eqs.Eg.cwiseProduct(prob.h);
  const VectorXd c = eqs.D.cwiseProduct(prob.c);

  KktSolver kkt(A, G);
  auto split = [&](const VectorXd& v, VectorXd& x, VectorXd& y, VectorXd& z) {
    x = v.head(n);
    y = v.segment(n, pe);
    z = v.tail(d);
  };
  auto stack = [&](const VectorXd& x, const VectorXd& y, const VectorXd& z) {
    VectorXd v(n + pe + d);
    v << x, y, z;
    return v;
  };

  // Initial point.
  kkt.factor(MatrixXd::Identity(d, d));
  VectorXd x, y, z, s, tmp_x, tmp_y, tmp_z;
  split(kkt.solve(stack(VectorXd::Zero(n), b, h)), x, tmp_y, tmp_z);
  s = -tmp_z;
  {
    const double ap = -cones.min_eig(s);
    if (d && ap >= 0) cones.add_identity(s, 1.0 + ap);
  }
  split(kkt.solve(stack(-c, VectorXd::Zero(pe), VectorXd::Zero(d))), tmp_x, y, z);
  {
    const double ad = -cones.min_eig(z);
    if (d && ad >= 0) cones.add_identity(z, 1.0 + ad);
  }
  double tau = 1.0;
  double kappa = 1.0;

  const double bnorm = std::max(1.0, std::sqrt(b.squaredNorm() + h.squaredNorm()));
  const double cnorm = std::max(1.0, safe_norm(c));
  const VectorXd e = cones.identity();

  MatrixXd W, Winv;
  int stall = 0;
  for (int it = 0; it <= st.max_iterations; ++it) {
    out.iterations = it;
    const VectorXd rx = -(A.transpose() * y + G.transpose() * z + c * tau);
    const VectorXd ry = A * x - b * tau;
    const VectorXd rz = s + G * x - h * tau;
    const double cx = c.dot(x);
    const double by_hz = b.dot(y) + h.dot(z);
    const double rt = kappa + cx + by_hz;

    if (!x.allFinite() || !z.allFinite() || !s.allFinite() || !std::isfinite(tau)) break;

    const double pres = std::sqrt(ry.squaredNorm() + rz.squaredNorm()) / tau / bnorm;
    const double dres = safe_norm(rx) / tau / cnorm;
    const double pcost = cx / tau;
    const double dcost = -by_hz / tau;
    const double gap = s.dot(z) / (tau * tau);
    double relgap = kInf;
    if (pcost < 0)
      relgap = gap / -pcost;
    else if (dcost > 0)
      relgap = gap / dcost;
    out.residuals = {pres, dres, gap};

    const double hresx = safe_norm(A.transpose() * y + G.transpose() * z);
    const double hresyz = std::max(safe_norm(A * x), safe_norm(G * x + s));
    auto converged = [&](double tol, double gtol) {
      return pres < tol && dres < tol && (gap < gtol || relgap < gtol);
    };
    auto infeasible = [&](double tol) { return by_hz < 0 && hresx / -by_hz < tol; };
    auto unbounded = [&](double tol) { return cx < 0 && hresyz / -cx < tol; };

    const bool last = it == st.max_iterations || stall >= 3;
    if (converged(st.feas_tol, std::max(st.abs_gap_tol, st.rel_gap_tol)) ||
        (last && converged(st.reduced_tol, st.reduced_tol))) {
      out.status = SolveStatus::Optimal;
      out.x = eqs.D.cwiseProduct(x / tau);
      out.y = eqs.Ea.cwiseProduct(y / tau);
      out.z = eqs.Eg.cwiseProduct(z / tau);
      out.value = prob.c.dot(out.x) + prob.c0;
      return out;
    }
    if (infeasible(st.feas_tol) || (last && infeasible(st.reduced_tol))) {
      out.status = SolveStatus::Infeasible;
      out.y = eqs.Ea.cwiseProduct(y / -by_hz);
      out.z = eqs.Eg.cwiseProduct(z / -by_hz);
      return out;
    }
    if (unbounded(st.feas_tol) || (last && unbounded(st.reduced_tol))) {
      out.status = SolveStatus::Unbounded;
      out.x = eqs.D.cwiseProduct(x / -cx);
      return out;
    }
    if (last) break;

    const double mu = (s.dot(z) + tau * kappa) / (cones.degree() + 1);
    cones.nt_scaling(s, z, W, Winv);
    const VectorXd lambda = W * z;
    kkt.factor(W * W);

    VectorXd x1, y1, z1;
    split(kkt.solve(stack(-c, b, h)), x1, y1, z1);
    const double denom = c.dot(x1) + b.dot(y1) + h.dot(z1) - kappa / tau;

    auto direction = [&](double sig, const VectorXd& rs, double rk, VectorXd& dx, VectorXd& dy,
                         VectorXd& dz, VectorXd& ds, double& dtau, double& dkappa) {
      const VectorXd wl = W * cones.divide(lambda, rs);
      VectorXd x2, y2, z2;
      split(kkt.solve(stack((1 - sig) * rx, -(1 - sig) * ry, -(1 - sig) * rz - wl)), x2, y2, z2);
      dtau = (-(1 - sig) * rt - rk / tau - (c.dot(x2) + b.dot(y2) + h.dot(z2))) / denom;
      dx = x2 + dtau * x1;
      dy = y2 + dtau * y1;
      dz = z2 + dtau * z1;
      ds = wl - W * (W * dz);
      dkappa = (rk - kappa * dtau) / tau;
    };
    auto step_to_boundary = [&](const VectorXd& ds, const VectorXd& dz, double dtau, double dkappa) {
      double a = cones.max_step(s, ds, 1e6);
      a = std::min(a, cones.max_step(z, dz, 1e6));
      if (dtau < 0) a = std::min(a, -tau / dtau);
      if (dkappa < 0) a = std::min(a, -kappa / dkappa);
      return a;
    };

    VectorXd dxa, dya, dza, dsa;
    double dta = 0, dka = 0;
    const VectorXd ll = cones.product(lambda, lambda);
    direction(0.0, -ll, -tau * kappa, dxa, dya, dza, dsa, dta, dka);
    const double alpha_aff = std::min(1.0, step_to_boundary(dsa, dza, dta, dka));
    double sigma = std::pow(1.0 - alpha_aff, 3);
    sigma = std::clamp(sigma, 1e-4, 1.0);

    const VectorXd corr = cones.product(Winv * dsa, W * dza);
    const VectorXd rs = -ll + sigma * mu * e - corr;
    const double rk = -tau * kappa + sigma * mu - dta * dka;
    VectorXd dx, dy, dz, ds;
    double dt = 0, dk = 0;
    direction(sigma, rs, rk, dx, dy, dz, ds, dt, dk);
    const double alpha = std::min(1.0, st.step_fraction * step_to_boundary(ds, dz, dt, dk));
    if (!(alpha > 1e-12) || !dx.allFinite()) {
      ++stall;
      if (stall >= 3) continue;
      break;
    }
    stall = alpha < 1e-8 ? stall + 1 : 0;

    x += alpha * dx;
    y += alpha * dy;
    z += alpha * dz;
    s += alpha * ds;
    tau += alpha * dt;
    kappa += alpha * dk;
  }
  out.status = SolveStatus::NumericalFailure;
  return out;
}

}  // namespace detail

SolveOutcome solve(ConicProblem problem, const SolverSettings& settings) {
  problem.normalize();
  const int n = problem.n();
  if (problem.A.cols() != n || problem.b.size() != problem.A.rows() || problem.G.cols() != n ||
      problem.h.size() != problem.G.rows() || problem.cone.total_rows() != problem.G.rows())
    throw InvalidInput("conic problem dimensions are inconsistent");

  detail::PresolveResult pre;
  if (settings.presolve) {
    pre = detail::presolve(problem);
  } else {
    // Zero-cone rows still become equalities; nothing is fixed or dropped.
    ConicProblem p2;
    p2.c = problem.c;
    p2.c0 = problem.c0;
    std::vector<int> eq_rows, cone_rows;
    int row = 0;
    for (const auto& f : problem.cone.factors()) {
      for (int k = 0; k < f.size; ++k)
        (f.kind == ConeKind::Zero ? eq_rows : cone_rows).push_back(row + k);
      if (f.kind != ConeKind::Zero) p2.cone.append(f);
      row += f.size;
    }
    p2.A.resize(problem.A.rows() + static_cast<Eigen::Index>(eq_rows.size()), n);
    p2.b.resize(p2.A.rows());
    p2.A.topRows(problem.A.rows()) = problem.A;
    p2.b.head(problem.A.rows()) = problem.b;
    for (std::size_t i = 0; i < eq_rows.size(); ++i) {
      p2.A.row(problem.A.rows() + i) = problem.G.row(eq_rows[i]);
      p2.b(problem.A.rows() + i) = problem.h(eq_rows[i]);
    }
    p2.G.resize(static_cast<Eigen::Index>(cone_rows.size()), n);
    p2.h.resize(p2.G.rows());
    for (std::size_t i = 0; i < cone_rows.size(); ++i) {
      p2.G.row(i) = problem.G.row(cone_rows[i]);
      p2.h(i) = problem.h(cone_rows[i]);
    }
    pre.reduced = std::move(p2);
    pre.fixed_values = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n; ++j) pre.kept_columns.push_back(j);
  }

  SolveOutcome out;
  if (pre.decided) {
    out.status = pre.status;
    return out;
  }
  const ConicProblem& red = pre.reduced;
  if (red.n() == 0) {
    // Presolve fixed every variable and checked every row.
    if (red.A.rows() > 0 || red.G.rows() > 0) {
      out = detail::solve_hsde(red, settings);
    } else {
      out.status = SolveStatus::Optimal;
    }
  } else {
    out = detail::solve_hsde(red, settings);
  }
  if (out.status == SolveStatus::Optimal) {
    Eigen::VectorXd xf = pre.fixed_values;
    for (std::size_t k = 0; k < pre.kept_columns.size(); ++k) xf(pre.kept_columns[k]) = out.x(k);
    out.x = xf;
    out.value = problem.c.dot(xf) + problem.c0;
  } else if (out.status == SolveStatus::Unbounded && out.x.size()) {
    Eigen::VectorXd xf = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k < pre.kept_columns.size(); ++k) xf(pre.kept_columns[k]) = out.x(k);
    out.x = xf;
  }
  return out;
}

ConicProblem substitute_theta(const ConicData& d, const Point& theta) {
  if (theta.size() != d.p()) throw InvalidInput("theta dimension differs from program p");
  ConicProblem out;
  out.c = d.c;
  out.c0 = d.c0 + d.c_theta.dot(theta);
  out.A = d.A_eq;
  out.b = d.b_eq + d.B_eq * theta;
  out.G = d.G;
  out.h = d.h + d.H * theta;
  out.cone = d.cone;
  out.normalize();
  return out;
}

SolveOutcome solve_fixed_commutation(const ParametricProgram& prog, const Point& theta,
                                     const Commutation& delta, const SolverSettings& settings) {
  if (!theta.allFinite()) throw InvalidInput("theta must be finite");
  return solve(substitute_theta(prog.instantiate(delta), theta), settings);
}

}  // namespace commutree
