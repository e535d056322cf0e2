#include <cmath>

#include "commutree/errors.hpp"
#include "commutree/instance_gen.hpp"

namespace commutree {

namespace {

struct Piece {
  double lo = 0.0;
  double hi = 0.0;
  double cost = 0.0;
};

// Variables (u, t): min t s.t. u = -theta, lo <= u <= hi, u^2 <= t.
ConicData interval_data(const Piece& q) {
  ConicData d;
  d.c = Eigen::Vector2d(0.0, 1.0);
  d.c_theta = Eigen::VectorXd::Zero(1);
  d.c0 = q.cost;
  d.A_eq = Eigen::RowVector2d(1.0, 0.0);
  d.b_eq = Eigen::VectorXd::Zero(1);
  d.B_eq = -Eigen::MatrixXd::Ones(1, 1);
  d.G.resize(5, 2);
  d.G << 1, 0,  //
      -1, 0,    //
      0, -1,    //
      0, -1,    //
      -2, 0;
  d.h.resize(5);
  d.h << q.hi, -q.lo, 1.0, -1.0, 0.0;
  d.H = Eigen::MatrixXd::Zero(5, 1);
  d.cone = ConeSpec({{ConeKind::NonnegOrthant, 2}, {ConeKind::SecondOrder, 3}});
  return d;
}

ParametricProgram interval_program(const std::string& name, const Piece& p0, const Piece& p1) {
  MixedEncoding enc;
  enc.base = interval_data(p0);
  enc.c_delta = Eigen::VectorXd::Constant(1, p1.cost - p0.cost);
  enc.A_delta = Eigen::MatrixXd::Zero(1, 1);
  enc.G_delta = Eigen::MatrixXd::Zero(5, 1);
  enc.G_delta(0, 0) = -(p1.hi - p0.hi);
  enc.G_delta(1, 0) = p1.lo - p0.lo;
  return ParametricProgram::from_mixed(name, 1, 1, std::move(enc));
}

Polytope unit_segment() { return Polytope(Eigen::RowVector2d(-1.0, 1.0)); }

}  // namespace

Polytope box_polytope(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  const int p = static_cast<int>(lo.size());
  if (hi.size() != p || p < 1 || p > 20) throw InvalidInput("bad box bounds");
  const int k = 1 << p;
  Eigen::MatrixXd v(p, k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < p; ++i) v(i, j) = (j >> i) & 1 ? hi(i) : lo(i);
  return Polytope(v);
}

ToyInstance make_toy1d() {
  return {"toy1d", interval_program("toy1d", {-1.0, 0.2, 0.0}, {-0.2, 1.0, 0.0}), unit_segment(),
          "min u^2, theta + u = 0, u in [-1,0.2] (delta 0) or [-0.2,1] (delta 1); V* = theta^2"};
}

ToyInstance make_toy1d_offset() {
  return {"toy1d-offset",
          interval_program("toy1d-offset", {-1.0, 0.2, 0.0}, {-0.2, 1.0, 0.1}), unit_segment(),
          "toy1d with cost +0.1 under delta 1; V*_1 = theta^2 + 0.1"};
}

ToyInstance make_toy1d_kappa(double center, double kappa) {
  if (!(kappa > 0) || std::abs(center) + kappa >= 1.0)
    throw InvalidInput("toy1d-kappa needs kappa > 0 and |center| + kappa < 1");
  const Piece p0{-1.0, -(center - kappa), 0.0};
  const Piece p1{-(center + kappa), 1.0, 0.0};
  return {"toy1d-kappa", interval_program("toy1d-kappa", p0, p1), unit_segment(),
          "feasible sets [c-kappa,1] (delta 0) and [-1,c+kappa] (delta 1); V* = theta^2"};
}

ToyInstance make_toy2d() {
  // Variables (u1, u2, t); u = -theta; t >= |u|^2.
  auto piece = [](Eigen::RowVector3d g, double h, double c_u1, double c0) {
    ConicData d;
    d.c = Eigen::Vector3d(c_u1, 0.0, 1.0);
    d.c_theta = Eigen::VectorXd::Zero(2);
    d.c0 = c0;
    d.A_eq = Eigen::MatrixXd::Zero(2, 3);
    d.A_eq(0, 0) = 1.0;
    d.A_eq(1, 1) = 1.0;
    d.b_eq = Eigen::VectorXd::Zero(2);
    d.B_eq = -Eigen::MatrixXd::Identity(2, 2);
    d.G = Eigen::MatrixXd::Zero(5, 3);
    d.G.row(0) = g;
    d.G(1, 2) = -1.0;
    d.G(2, 2) = -1.0;
    d.G(3, 0) = -2.0;
    d.G(4, 1) = -2.0;
    d.h.resize(5);
    d.h << h, 1.0, -1.0, 0.0, 0.0;
    d.H = Eigen::MatrixXd::Zero(5, 2);
    d.cone = ConeSpec({{ConeKind::NonnegOrthant, 1}, {ConeKind::SecondOrder, 4}});
    return d;
  };
  ParametricProgram::Table table;
  table.emplace(Commutation::from_string("100"), piece({1, 0, 0}, 0.2, 0.0, 0.0));
  table.emplace(Commutation::from_string("010"), piece({0, 1, 0}, 0.2, 0.0, 0.05));
  table.emplace(Commutation::from_string("001"), piece({-1, -1, 0}, 0.1, 0.1, 0.1));
  return {"toy2d",
          ParametricProgram::from_table("toy2d", 2, 3, std::move(table), {OneHotGroup{{0, 1, 2}}}),
          box_polytope(Eigen::Vector2d(-1, -1), Eigen::Vector2d(1, 1)),
          "u = -theta on [-1,1]^2 with pieces theta1 >= -0.2 (cost |theta|^2), theta2 >= -0.2 "
          "(+0.05), theta1 + theta2 <= 0.1 (+0.1 - 0.1 theta1)"};
}

ToyInstance make_toy(const std::string& name) {
  if (name == "toy1d") return make_toy1d();
  if (name == "toy1d-offset") return make_toy1d_offset();
  if (name == "toy2d") return make_toy2d();
  throw InvalidInput("unknown toy '" + name + "' (expected toy1d, toy1d-offset or toy2d)");
}

std::vector<ToyInstance> toy_instances() { return {make_toy1d(), make_toy1d_offset(), make_toy2d()}; }

}  // namespace commutree
