#include <cmath>
#include <numbers>

#include "commutree/errors.hpp"
#include "commutree/instance_gen.hpp"

namespace commutree {

namespace {

struct Block {
  Eigen::MatrixXd facets;    // rows f' xi <= 1
  Eigen::MatrixXd vertices;  // columns
};

// Disturbance term max_w h'Ed w over the vertices of the box |w| <= w_bound.
Eigen::VectorXd disturbance_support(const Eigen::MatrixXd& H, const Eigen::MatrixXd& Ed,
                                    double w_bound) {
  const int nw = static_cast<int>(Ed.cols());
  if (nw > 20) throw InvalidInput("too many disturbance channels to enumerate");
  const Eigen::MatrixXd he = H * Ed;
  Eigen::VectorXd best = Eigen::VectorXd::Constant(H.rows(), -std::numeric_limits<double>::infinity());
  Eigen::VectorXd w(nw);
  for (long long mask = 0; mask < (1LL << nw); ++mask) {
    for (int i = 0; i < nw; ++i) w(i) = (mask >> i) & 1 ? w_bound : -w_bound;
    best = best.cwiseMax(he * w);
  }
  if (nw == 0) best.setZero();
  return best;
}

Eigen::VectorXd state_support(const Eigen::MatrixXd& HA, const Eigen::MatrixXd& vertices) {
  Eigen::VectorXd best =
      Eigen::VectorXd::Constant(HA.rows(), -std::numeric_limits<double>::infinity());
  for (Eigen::Index j = 0; j < vertices.cols(); ++j) best = best.cwiseMax(HA * vertices.col(j));
  return best;
}

}  // namespace

bool is_robust_invariant(const Eigen::MatrixXd& A_cl, const Eigen::MatrixXd& Ed, double w_bound,
                         const Eigen::MatrixXd& H, const Eigen::MatrixXd& vertices,
                         double tolerance) {
  // The maximum over (v, w) of a sum of separate terms is the sum of maxima.
  const Eigen::VectorXd lhs =
      state_support(H * A_cl, vertices) + disturbance_support(H, Ed, w_bound);
  return (lhs.array() <= 1.0 + tolerance).all();
}

InvariantSet construct_theta(const Eigen::MatrixXd& A_cl, const Eigen::MatrixXd& Ed,
                             const ThetaOptions& opts) {
  const int n = static_cast<int>(A_cl.rows());
  if (A_cl.cols() != n || Ed.rows() != n) throw InvalidInput("closed-loop dimensions are inconsistent");
  if (!(opts.shrink > 0 && opts.shrink < 1) || !(opts.start > 0) || !(opts.margin >= 1))
    throw InvalidInput("bad invariant-set schedule");

  // Real modal basis of the closed loop.
  Eigen::EigenSolver<Eigen::MatrixXd> es(A_cl);
  const Eigen::VectorXcd lam = es.eigenvalues();
  const Eigen::MatrixXcd vec = es.eigenvectors();
  Eigen::MatrixXd s(n, n);
  std::vector<Block> blocks;
  for (int i = 0; i < n;) {
    const double r = std::abs(lam(i));
    if (std::abs(lam(i).imag()) > 1e-12 * std::max(1.0, r) && i + 1 < n) {
      s.col(i) = vec.col(i).real();
      s.col(i + 1) = vec.col(i).imag();
      int k = 4;
      while (r / std::cos(std::numbers::pi / k) > 0.995 && k < opts.max_polygon) k += 2;
      Block b;
      b.facets.resize(k, 2);
      b.vertices.resize(2, k);
      const double rc = 1.0 / std::cos(std::numbers::pi / k);
      for (int j = 0; j < k; ++j) {
        const double a = 2.0 * std::numbers::pi * j / k;
        b.facets.row(j) << std::cos(a), std::sin(a);
        b.vertices.col(j) << rc * std::cos(a + std::numbers::pi / k), rc * std::sin(a + std::numbers::pi / k);
      }
      blocks.push_back(std::move(b));
      i += 2;
    } else {
      s.col(i) = vec.col(i).real();
      Block b;
      b.facets = Eigen::Vector2d(1.0, -1.0);
      b.vertices = Eigen::RowVector2d(1.0, -1.0);
      blocks.push_back(std::move(b));
      i += 1;
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(s);
  const auto sv = svd.singularValues();
  if (!(sv(n - 1) > 1e-10 * sv(0)))
    throw NoInvariantBoxFound("closed loop has no well-conditioned real modal basis");

  // Product of block templates.
  int rows = 0;
  long long count = 1;
  for (const auto& b : blocks) {
    rows += static_cast<int>(b.facets.rows());
    count *= b.vertices.cols();
  }
  if (count > 2'000'000) throw InvalidInput("invariant-set template has too many vertices");
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(rows, n);
  for (int r0 = 0, c0 = 0; const auto& b : blocks) {
    f.block(r0, c0, b.facets.rows(), b.facets.cols()) = b.facets;
    r0 += static_cast<int>(b.facets.rows());
    c0 += static_cast<int>(b.facets.cols());
  }
  Eigen::MatrixXd vm(n, count);
  std::vector<int> idx(blocks.size(), 0);
  for (long long j = 0; j < count; ++j) {
    for (int c0 = 0, k = 0; k < static_cast<int>(blocks.size()); ++k) {
      const auto& b = blocks[static_cast<std::size_t>(k)];
      vm.block(c0, j, b.vertices.rows(), 1) = b.vertices.col(idx[static_cast<std::size_t>(k)]);
      c0 += static_cast<int>(b.vertices.rows());
    }
    for (int k = static_cast<int>(blocks.size()) - 1; k >= 0; --k) {
      auto& d = idx[static_cast<std::size_t>(k)];
      if (++d < blocks[static_cast<std::size_t>(k)].vertices.cols()) break;
      d = 0;
    }
  }
  const Eigen::MatrixXd h_unit = f * s.inverse();
  const Eigen::MatrixXd v_unit = s * vm;

  // Scaled set c * template: invariant iff c a + b <= c row-wise.
  const Eigen::VectorXd a = state_support(h_unit * A_cl, v_unit);
  const Eigen::VectorXd b = disturbance_support(h_unit, Ed, opts.w_bound);
  auto invariant = [&](double c) { return ((c * a + b).array() <= c * (1.0 + 1e-12)).all(); };

  double c = opts.start;
  if (!invariant(c))
    throw NoInvariantBoxFound("no robust invariant scale on the schedule (largest scale fails)");
  for (int k = 1; k < opts.max_steps; ++k) {
    const double next = c * opts.shrink;
    if (!invariant(next)) break;
    c = next;
  }
  c *= opts.margin;

  InvariantSet out;
  out.scale = c;
  out.H = h_unit / c;
  out.vertices = Polytope(c * v_unit);
  if (!is_robust_invariant(A_cl, Ed, opts.w_bound, out.H, out.vertices.vertices()))
    throw NoInvariantBoxFound("enlarged set failed the invariance re-check");
  return out;
}

}  // namespace commutree
