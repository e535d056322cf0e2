#include <doctest.h>

#include <cmath>
#include <numbers>

#include "commutree/errors.hpp"
#include "commutree/instance_gen.hpp"
#include "commutree/mi_solver.hpp"
#include "oracles.hpp"

using namespace commutree;

namespace {

double spectral_radius(const Eigen::MatrixXd& a) {
  return Eigen::EigenSolver<Eigen::MatrixXd>(a).eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::MatrixXd oscillator(double zeta, double wn) {
  Eigen::MatrixXd a(2, 2);
  a << 0, 1, -wn * wn, -2 * zeta * wn;
  return a;
}

}  // namespace

TEST_CASE("toy closed forms") {
  const auto toy = make_toy1d();
  MixedIntegerOracle oracle(toy.program);
  for (double th : {-1.0, -0.5, -0.2, 0.0, 0.2, 0.7, 1.0}) {
    const auto r0 = oracle.solve_fixed(Point::Constant(1, th), Commutation::from_string("0"));
    const auto r1 = oracle.solve_fixed(Point::Constant(1, th), Commutation::from_string("1"));
    CHECK(r0.optimal() == (th >= -0.2 - 1e-12));
    CHECK(r1.optimal() == (th <= 0.2 + 1e-12));
    if (r0.optimal()) CHECK(r0.value == doctest::Approx(th * th).epsilon(1e-6));
    if (r1.optimal()) CHECK(r1.value == doctest::Approx(th * th).epsilon(1e-6));
  }
  const auto off = make_toy1d_offset();
  CHECK(solve_fixed_commutation(off.program, Point::Constant(1, 0.1), Commutation::from_string("1")).value ==
        doctest::Approx(0.11).epsilon(1e-6));
  CHECK_THROWS_AS(make_toy("nope"), InvalidInput);
  CHECK(make_toy("toy2d").program.p() == 2);

  const auto k = make_toy1d_kappa(1.0 / 3, 0.1);
  CHECK(solve_fixed_commutation(k.program, Point::Constant(1, 0.24), Commutation::from_string("0")).optimal());
  CHECK(solve_fixed_commutation(k.program, Point::Constant(1, 0.42), Commutation::from_string("1")).optimal());
  CHECK_FALSE(
      solve_fixed_commutation(k.program, Point::Constant(1, 0.22), Commutation::from_string("0")).optimal());
}

TEST_CASE("rng is reproducible") {
  Rng a(42), b(42);
  double mean = 0.0, var = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = a.uniform();
    CHECK(u == b.uniform());
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double z = a.normal();
    b.normal();
    mean += z;
    var += z * z;
  }
  CHECK(std::abs(mean / 20000) < 0.03);
  CHECK(std::abs(var / 20000 - 1.0) < 0.05);
}

TEST_CASE("generated oscillators satisfy the generation box") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto s = generate_mdof(3, seed);
    CHECK(s.modes.size() == 3);
    CHECK((s.T.transpose() * s.T - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((s.Gamma - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-10);
    for (int i = 0; i < 3; ++i) {
      CHECK(s.M(i, i) >= 0.1);
      CHECK(s.M(i, i) <= 1.0);
      const auto& md = s.modes[i];
      CHECK(1.0 / md.damping_rate >= 1.0);
      CHECK(1.0 / md.damping_rate <= 10.0);
      CHECK(md.damped_frequency <= 2 * std::numbers::pi);
      CHECK(md.zeta <= 1.0);
    }
    const Eigen::MatrixXd mh = s.M.diagonal().cwiseSqrt().asDiagonal();
    CHECK((mh * s.T * s.Lambda.asDiagonal() * s.T.transpose() * mh - s.C).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((mh * s.T * s.Omega.asDiagonal() * s.T.transpose() * mh - s.K).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(s.K).eigenvalues().minCoeff() >= -1e-9);

    const auto d = discretize(s);
    CHECK(spectral_radius(d.Ad) < 1.0);
    Eigen::MatrixXd ctrb(6, 18);
    Eigen::MatrixXd blk = d.Bd;
    for (int i = 0; i < 6; ++i) {
      ctrb.middleCols(3 * i, 3) = blk;
      blk = d.Ad * blk;
    }
    CHECK(Eigen::FullPivLU<Eigen::MatrixXd>(ctrb).rank() == 6);
  }
  CHECK_THROWS_AS(generate_mdof(0, 1), InvalidInput);
}

TEST_CASE("critically damped mode frequency") {
  int critical = 0, total = 0;
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    for (const auto& md : generate_mdof(3, seed).modes) {
      critical += md.zeta == 1.0 ? 1 : 0;
      ++total;
    }
  }
  const double frac = static_cast<double>(critical) / total;
  CHECK(frac >= 0.15);
  CHECK(frac <= 0.25);
}

TEST_CASE("oscillator zero-order hold matches the series exponential") {
  const Eigen::Vector2d b(0, 1);
  for (const auto& [zeta, wn] : std::vector<std::pair<double, double>>{
           {0.0, 2.0}, {1.0, 0.7}, {0.3, 5.0}, {0.999999, 1.3}, {1.0, 3.0}}) {
    for (double h : {0.01, 0.1, 0.5}) {
      const Eigen::MatrixXd z = oscillator_zoh(zeta, wn, h);
      const Eigen::MatrixXd ref = testing::zoh_series(oscillator(zeta, wn), b, h);
      CHECK((z - ref).cwiseAbs().maxCoeff() <= 1e-9);
    }
  }
}

TEST_CASE("discretization matches the block exponential") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto s = generate_mdof(2, seed);
    const auto d = discretize(s);
    double wmax = 0.0;
    for (const auto& md : s.modes) wmax = std::max(wmax, md.omega_n);
    const double lam = Eigen::EigenSolver<Eigen::MatrixXd>(s.A).eigenvalues().cwiseAbs().maxCoeff();
    CHECK(lam == doctest::Approx(wmax).epsilon(1e-9));
    CHECK(d.omega_s == doctest::Approx(10 * wmax));
    Eigen::MatrixXd be(4, 4);
    be << s.B, s.E;
    const Eigen::MatrixXd ref = testing::zoh_series(s.A, be, d.sample_time);
    CHECK((d.Ad - ref.leftCols(4)).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((d.Bd - ref.middleCols(4, 2)).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((d.Ed - ref.rightCols(2)).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("scalar Riccati equation") {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Constant(1, 1, 0.5);
  const Eigen::MatrixXd b = Eigen::MatrixXd::Constant(1, 1, 1.0);
  const Eigen::MatrixXd one = Eigen::MatrixXd::Constant(1, 1, 1.0);
  const auto r = lqr_synthesis(a, b, one, one);
  const double p = testing::scalar_dare(0.5, 1.0, 1.0, 1.0);
  CHECK(r.P(0, 0) == doctest::Approx(p).epsilon(1e-9));
  CHECK(r.K(0, 0) == doctest::Approx(0.5 * p / (1 + p)).epsilon(1e-9));

  const auto zero = lqr_synthesis(a, b, Eigen::MatrixXd::Zero(1, 1), one);
  CHECK(std::abs(zero.K(0, 0)) <= 1e-12);

  Eigen::MatrixXd au(2, 2);
  au << 2.0, 0.0, 0.0, 0.5;
  Eigen::MatrixXd bu(2, 1);
  bu << 0.0, 1.0;
  CHECK_THROWS_AS(lqr_synthesis(au, bu, Eigen::MatrixXd::Identity(2, 2), one), RiccatiDivergence);
}

TEST_CASE("invariant parameter set") {
  const Eigen::MatrixXd half = Eigen::MatrixXd::Constant(1, 1, 0.5);
  const Eigen::MatrixXd e = Eigen::MatrixXd::Constant(1, 1, 1.0);
  const auto s = construct_theta(half, e);
  CHECK(s.scale == std::ldexp(1.0, -8));
  CHECK(s.vertices.vertices().cwiseAbs().maxCoeff() == doctest::Approx(s.scale));
  CHECK(is_robust_invariant(half, e, 1e-3, s.H, s.vertices.vertices()));
  // Just below the scalar threshold 2e-3 the set is no longer invariant.
  CHECK_FALSE(is_robust_invariant(half, e, 1e-3, s.H / 1.9e-3 * s.scale, s.vertices.vertices() * (1.9e-3 / s.scale)));

  CHECK_THROWS_AS(construct_theta(Eigen::MatrixXd::Constant(1, 1, 1.01), e), NoInvariantBoxFound);

  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto mc = make_mc_draft(2, 3, seed, RobustMode::BoxTightened);
    const Eigen::MatrixXd a_cl = mc.discrete.Ad - mc.discrete.Bd * mc.lqr.K;
    CHECK(spectral_radius(a_cl) < 1.0);
    CHECK(is_robust_invariant(a_cl, mc.discrete.Ed, mc.w_bound, mc.theta.H, mc.theta.vertices.vertices()));
  }
}

TEST_CASE("assembled MPC programs") {
  const auto one = generate_instance(1, 3, 7, RobustMode::BoxTightened);
  REQUIRE(one.program.has_value());
  CHECK(one.program->p() == 2);
  CHECK(one.program->m() == 9);
  CHECK(validate(*one.program).empty());

  const auto three = generate_instance(3, 3, 1, RobustMode::BoxTightened);
  CHECK(three.program->p() == 6);
  CHECK(three.program->m() == 21);
  CHECK(validate(*three.program).empty());

  const auto again = generate_instance(1, 3, 7, RobustMode::BoxTightened);
  CHECK(write_instance(*one.program, one.theta_normalized, one.metadata()) ==
        write_instance(*again.program, again.theta_normalized, again.metadata()));

  const auto nominal = generate_instance(1, 3, 7, RobustMode::Nominal);
  const auto at_origin = solve_minlp(*nominal.program, Point::Zero(2));
  REQUIRE(at_origin.status == MinlpStatus::Optimal);
  CHECK(std::abs(at_origin.value()) <= 1e-6);

  CHECK(parse_robust_mode("box-tightened") == RobustMode::BoxTightened);
  CHECK(parse_robust_mode("nominal") == RobustMode::Nominal);
  CHECK_FALSE(parse_robust_mode("tube").has_value());
}

TEST_CASE("box tightening keeps disturbed trajectories inside theta") {
  const auto mc = generate_instance(1, 3, 3, RobustMode::BoxTightened);
  MixedIntegerOracle oracle(*mc.program);
  Rng rng(10);
  const int nu = 1, N = 3;
  int plans = 0;
  for (int t = 0; t < 1000; ++t) {
    const Eigen::MatrixXd& tv = mc.theta_normalized.vertices();
    Eigen::VectorXd w(tv.cols());
    for (int i = 0; i < w.size(); ++i) w(i) = -std::log(1.0 - rng.uniform());
    const Point th = tv * (w / w.sum());
    const auto plan = t % 10 == 0 ? oracle.solve_minlp(th) : oracle.find_feasible(th);
    REQUIRE(plan.status == MinlpStatus::Optimal);
    ++plans;
    Eigen::VectorXd x = th.cwiseQuotient(mc.state_scale);
    for (int k = 0; k < N; ++k) {
      Eigen::VectorXd u(nu);
      for (int i = 0; i < nu; ++i) u(i) = mc.u_max(i) * plan.outcome.x(k * nu + i);
      Eigen::VectorXd dist(nu);
      for (int i = 0; i < nu; ++i) dist(i) = mc.w_bound * (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform();
      x = mc.discrete.Ad * x + mc.discrete.Bd * u + mc.discrete.Ed * dist;
      CHECK((mc.theta.H * x).maxCoeff() <= 1.0 + 1e-6);
    }
  }
  CHECK(plans == 1000);
}

TEST_CASE("tightening offsets") {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Constant(1, 1, 0.5);
  const Eigen::MatrixXd e = Eigen::MatrixXd::Constant(1, 1, 2.0);
  Eigen::MatrixXd h(2, 1);
  h << 1.0, -1.0;
  const auto t = tightening_offsets(a, e, h, 3, 0.1);
  CHECK(t(0, 0) == 0.0);
  CHECK(t(1, 0) == doctest::Approx(0.2));
  CHECK(t(2, 0) == doctest::Approx(0.3));
  CHECK(t(3, 1) == doctest::Approx(0.35));
}
