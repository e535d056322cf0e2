#include <cmath>
#include <numbers>

#include "commutree/errors.hpp"
#include "commutree/instance_gen.hpp"

namespace commutree {

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
  return r * std::cos(2.0 * std::numbers::pi * u2);
}

MdofSystem generate_mdof(int n_r, std::uint64_t seed) {
  if (n_r < 1) throw InvalidInput("n_r must be at least 1");
  Rng rng(seed);
  MdofSystem s;
  s.n_r = n_r;
  Eigen::VectorXd m(n_r);
  for (int i = 0; i < n_r; ++i) m(i) = rng.uniform(0.1, 1.0);
  s.M = m.asDiagonal();

  Eigen::MatrixXd g(n_r, n_r);
  for (int j = 0; j < n_r; ++j)
    for (int i = 0; i < n_r; ++i) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  const Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  s.T = q;
  for (int j = 0; j < n_r; ++j)
    if (r(j, j) < 0) s.T.col(j) *= -1.0;

  s.Lambda.resize(n_r);
  s.Omega.resize(n_r);
  for (int i = 0; i < n_r; ++i) {
    ModeData md;
    md.damping_rate = 1.0 / rng.uniform(1.0, 10.0);
    if (rng.uniform() < 0.2) {
      md.zeta = 1.0;
      md.omega_n = md.damping_rate;
      md.damped_frequency = 0.0;
    } else {
      md.damped_frequency = 2.0 * std::numbers::pi * (1.0 - rng.uniform());
      md.omega_n = std::hypot(md.damping_rate, md.damped_frequency);
      md.zeta = md.damping_rate / md.omega_n;
    }
    s.Lambda(i) = 2.0 * md.zeta * md.omega_n;
    s.Omega(i) = md.omega_n * md.omega_n;
    s.modes.push_back(md);
  }

  const Eigen::MatrixXd mh = m.cwiseSqrt().asDiagonal();
  const Eigen::MatrixXd mh_inv = m.cwiseSqrt().cwiseInverse().asDiagonal();
  s.C = mh * s.T * s.Lambda.asDiagonal() * s.T.transpose() * mh;
  s.K = mh * s.T * s.Omega.asDiagonal() * s.T.transpose() * mh;
  s.L = mh * s.T;
  s.Gamma = s.T.transpose() * mh_inv * s.L;

  const Eigen::MatrixXd m_inv = m.cwiseInverse().asDiagonal();
  const int n = 2 * n_r;
  s.A = Eigen::MatrixXd::Zero(n, n);
  s.A.topRightCorner(n_r, n_r).setIdentity();
  s.A.bottomLeftCorner(n_r, n_r) = -m_inv * s.K;
  s.A.bottomRightCorner(n_r, n_r) = -m_inv * s.C;
  s.B = Eigen::MatrixXd::Zero(n, n_r);
  s.B.bottomRows(n_r) = m_inv * s.L;
  s.E = Eigen::MatrixXd::Zero(n, n_r);
  s.E.bottomRows(n_r).setIdentity();
  return s;
}

Eigen::Matrix<double, 2, 3> oscillator_zoh(double zeta, double omega_n, double h) {
  if (!(omega_n > 0)) throw InvalidInput("natural frequency must be positive");
  if (zeta < 0 || zeta > 1.0 + 1e-12) throw InvalidInput("damping ratio must lie in [0, 1]");
  const double sigma = zeta * omega_n;
  const double e = std::exp(-sigma * h);
  Eigen::Matrix2d phi;
  if (zeta >= 1.0 - 1e-9) {
    phi << 1.0 + sigma * h, h, -sigma * sigma * h, 1.0 - sigma * h;
  } else {
    const double wd = omega_n * std::sqrt(1.0 - zeta * zeta);
    const double c = std::cos(wd * h);
    const double sn = std::sin(wd * h);
    phi << c + sigma / wd * sn, sn / wd, -omega_n * omega_n / wd * sn, c - sigma / wd * sn;
  }
  phi *= e;
  // gamma = Ac^{-1} (Phi - I) e2 with Ac = [0 1; -wn^2 -2 zeta wn].
  const double w2 = omega_n * omega_n;
  Eigen::Matrix<double, 2, 3> out;
  out.leftCols<2>() = phi;
  out(0, 2) = -2.0 * zeta / omega_n * phi(0, 1) - (phi(1, 1) - 1.0) / w2;
  out(1, 2) = phi(0, 1);
  return out;
}

DiscreteSystem discretize(const MdofSystem& sys, double rate_multiplier) {
  if (!(rate_multiplier > 0)) throw InvalidInput("rate multiplier must be positive");
  const int nr = sys.n_r;
  const int n = 2 * nr;
  double wmax = 0.0;
  for (const auto& md : sys.modes) wmax = std::max(wmax, md.omega_n);
  DiscreteSystem d;
  d.omega_s = rate_multiplier * wmax;
  d.sample_time = 2.0 * std::numbers::pi / d.omega_s;

  // Modal state (eta, eta') with r = W eta, W = M^{-1/2} T.
  const Eigen::VectorXd m = sys.M.diagonal();
  const Eigen::MatrixXd w = m.cwiseSqrt().cwiseInverse().asDiagonal() * sys.T;
  const Eigen::MatrixXd w_inv = sys.T.transpose() * m.cwiseSqrt().asDiagonal();
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  s.topLeftCorner(nr, nr) = w;
  s.bottomRightCorner(nr, nr) = w;
  Eigen::MatrixXd s_inv = Eigen::MatrixXd::Zero(n, n);
  s_inv.topLeftCorner(nr, nr) = w_inv;
  s_inv.bottomRightCorner(nr, nr) = w_inv;

  Eigen::MatrixXd am = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd bm = Eigen::MatrixXd::Zero(n, nr);
  Eigen::MatrixXd em = Eigen::MatrixXd::Zero(n, nr);
  for (int i = 0; i < nr; ++i) {
    const auto z = oscillator_zoh(sys.modes[i].zeta, sys.modes[i].omega_n, d.sample_time);
    const int idx[2] = {i, nr + i};
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) am(idx[a], idx[b]) = z(a, b);
      bm(idx[a], i) = z(a, 2);
      // Disturbance enters as acceleration: eta'' += W^{-1} w.
      em.row(idx[a]) = z(a, 2) * w_inv.row(i);
    }
  }
  d.Ad = s * am * s_inv;
  d.Bd = s * bm;
  d.Ed = s * em;
  return d;
}

LqrResult lqr_synthesis(const Eigen::MatrixXd& Ad, const Eigen::MatrixXd& Bd,
                        const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R, int max_iterations,
                        double tolerance) {
  const int n = static_cast<int>(Ad.rows());
  if (Ad.cols() != n || Bd.rows() != n || Q.rows() != n || Q.cols() != n ||
      R.rows() != Bd.cols() || R.cols() != Bd.cols())
    throw InvalidInput("LQR matrix dimensions are inconsistent");
  auto step = [&](const Eigen::MatrixXd& p) -> Eigen::MatrixXd {
    const Eigen::MatrixXd bp = Bd.transpose() * p;
    const Eigen::MatrixXd gain = (R + bp * Bd).ldlt().solve(bp * Ad);
    Eigen::MatrixXd next = Q + Ad.transpose() * p * Ad - (bp * Ad).transpose() * gain;
    return 0.5 * (next + next.transpose());
  };
  LqrResult out;
  Eigen::MatrixXd p = Q;
  for (int it = 1; it <= max_iterations; ++it) {
    Eigen::MatrixXd next = step(p);
    if (!next.allFinite() || next.cwiseAbs().maxCoeff() > 1e14)
      throw RiccatiDivergence("Riccati iteration diverged after " + std::to_string(it) + " steps");
    const double diff = (next - p).cwiseAbs().maxCoeff();
    p = std::move(next);
    out.iterations = it;
    if (diff <= tolerance * std::max(1.0, p.cwiseAbs().maxCoeff())) {
      out.P = p;
      out.residual = (step(p) - p).cwiseAbs().maxCoeff();
      const Eigen::MatrixXd bp = Bd.transpose() * p;
      out.K = (R + bp * Bd).ldlt().solve(bp * Ad);
      const Eigen::MatrixXd acl = Ad - Bd * out.K;
      if (acl.eigenvalues().cwiseAbs().maxCoeff() >= 1.0)
        throw RiccatiDivergence("Riccati fixed point does not stabilize the loop");
      return out;
    }
  }
  throw RiccatiDivergence("Riccati iteration did not converge in " + std::to_string(max_iterations) +
                          " steps");
}

}  // namespace commutree
