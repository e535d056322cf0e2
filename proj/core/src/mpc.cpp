#include <cmath>
#include <sstream>

#include "commutree/errors.hpp"
#include "commutree/hexfloat.hpp"
#include "commutree/instance_gen.hpp"
#include "commutree/mi_solver.hpp"

namespace commutree {

namespace {

// Interior of the excluded input box, as a fraction of u_max.
constexpr double kInnerFraction = 1e-3;

std::string hex_list(const Eigen::VectorXd& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_hex(v(i));
  return s;
}

}  // namespace

const char* to_string(RobustMode m) {
  return m == RobustMode::Nominal ? "nominal" : "box-tightened";
}

std::optional<RobustMode> parse_robust_mode(const std::string& s) {
  if (s == "nominal") return RobustMode::Nominal;
  if (s == "box-tightened" || s == "tightened") return RobustMode::BoxTightened;
  return std::nullopt;
}

Eigen::MatrixXd tightening_offsets(const Eigen::MatrixXd& Ad, const Eigen::MatrixXd& Ed,
                                   const Eigen::MatrixXd& H, int horizon, double w_bound) {
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(horizon + 1, H.rows());
  // powers[i] = Ad^i Ed
  std::vector<Eigen::MatrixXd> powers{Ed};
  for (int i = 1; i < horizon; ++i) powers.push_back(Ad * powers.back());
  for (int k = 1; k <= horizon; ++k)
    for (int j = 0; j < k; ++j)
      t.row(k) += w_bound * (H * powers[static_cast<std::size_t>(k - 1 - j)]).cwiseAbs().rowwise().sum().transpose();
  return t;
}

McInstance make_mc_draft(int n_r, int horizon, std::uint64_t seed, RobustMode mode, double theta_margin) {
  if (horizon < 1) throw InvalidInput("horizon must be at least 1");
  McInstance mc;
  mc.seed = seed;
  mc.horizon = horizon;
  mc.mode = mode;
  mc.system = generate_mdof(n_r, seed);
  mc.discrete = discretize(mc.system);
  const int n = 2 * n_r;
  mc.Q_lqr = 0.1 * Eigen::MatrixXd::Identity(n, n);
  mc.R_lqr = Eigen::MatrixXd::Identity(n_r, n_r);
  mc.lqr = lqr_synthesis(mc.discrete.Ad, mc.discrete.Bd, mc.Q_lqr, mc.R_lqr);
  ThetaOptions opts;
  opts.margin = theta_margin;
  opts.w_bound = mc.w_bound;
  const Eigen::MatrixXd acl = mc.discrete.Ad - mc.discrete.Bd * mc.lqr.K;
  mc.theta = construct_theta(acl, mc.discrete.Ed, opts);

  const Eigen::MatrixXd& v = mc.theta.vertices.vertices();
  mc.u_max = (mc.lqr.K * v).cwiseAbs().rowwise().maxCoeff();
  mc.state_scale = v.cwiseAbs().rowwise().maxCoeff().cwiseInverse();
  mc.cost_scale = 0.0;
  for (Eigen::Index j = 0; j < v.cols(); ++j)
    mc.cost_scale = std::max(mc.cost_scale, v.col(j).dot(mc.lqr.P * v.col(j)));
  if (!(mc.u_max.minCoeff() > 0) || !(mc.cost_scale > 0))
    throw NoInvariantBoxFound("degenerate parameter set: zero input or cost scale");
  mc.theta_normalized = Polytope(mc.state_scale.asDiagonal() * v);
  return mc;
}

ParametricProgram assemble_mpc_program(McInstance& mc) {
  const int nr = mc.system.n_r;
  const int nu = nr;
  const int n = 2 * nr;
  const int N = mc.horizon;
  const int gsz = 2 * nu + 1;
  const int m = N * gsz;
  const Eigen::MatrixXd d = mc.state_scale.asDiagonal();
  const Eigen::MatrixXd d_inv = mc.state_scale.cwiseInverse().asDiagonal();
  const Eigen::MatrixXd a_n = d * mc.discrete.Ad * d_inv;
  const Eigen::MatrixXd b_n = d * mc.discrete.Bd * mc.u_max.asDiagonal();
  const Eigen::MatrixXd h_n = mc.theta.H * d_inv;
  const int q = static_cast<int>(h_n.rows());
  const Eigen::MatrixXd tight =
      mc.mode == RobustMode::BoxTightened
          ? tightening_offsets(mc.discrete.Ad, mc.discrete.Ed, mc.theta.H, N, mc.w_bound)
          : Eigen::MatrixXd::Zero(N + 1, q);

  // Variables: u_0..u_{N-1}, x_1..x_N (normalized), epigraph t.
  const int nz = N * nu + N * n;
  const int nx = nz + 1;
  auto u_at = [&](int k, int i) { return k * nu + i; };
  auto x_at = [&](int k, int i) { return N * nu + (k - 1) * n + i; };  // k = 1..N
  const int t_at = nz;
  auto bit = [&](int k, int piece) { return k * gsz + piece; };

  ConicData base;
  base.c = Eigen::VectorXd::Zero(nx);
  base.c(t_at) = 1.0;
  base.c_theta = Eigen::VectorXd::Zero(n);

  base.A_eq = Eigen::MatrixXd::Zero(N * n, nx);
  base.b_eq = Eigen::VectorXd::Zero(N * n);
  base.B_eq = Eigen::MatrixXd::Zero(N * n, n);
  for (int k = 0; k < N; ++k) {
    const int r0 = k * n;
    for (int i = 0; i < n; ++i) base.A_eq(r0 + i, x_at(k + 1, i)) = 1.0;
    for (int i = 0; i < nu; ++i) base.A_eq.block(r0, u_at(k, i), n, 1) = -b_n.col(i);
    if (k == 0) {
      base.B_eq.block(0, 0, n, n) = a_n;
    } else {
      for (int i = 0; i < n; ++i) base.A_eq.block(r0, x_at(k, i), n, 1) = -a_n.col(i);
    }
  }

  const int rows_box = 2 * N * nu;
  const int rows_zero = 2 * N * nu;
  const int rows_slab = 2 * N * nu;
  const int rows_state = N * q;
  const int rows_lin = rows_box + rows_zero + rows_slab + rows_state;
  const int rows_soc = 2 + nz;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(rows_lin + rows_soc, nx);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(rows_lin + rows_soc);
  Eigen::MatrixXd g_delta = Eigen::MatrixXd::Zero(rows_lin + rows_soc, m);
  int r = 0;
  for (int k = 0; k < N; ++k)
    for (int i = 0; i < nu; ++i)
      for (double sgn : {1.0, -1.0}) {
        g(r, u_at(k, i)) = sgn;
        h(r++) = 1.0;
      }
  // Zero piece: |u| <= 1 - delta_zero.
  for (int k = 0; k < N; ++k)
    for (int i = 0; i < nu; ++i)
      for (double sgn : {1.0, -1.0}) {
        g(r, u_at(k, i)) = sgn;
        g_delta(r, bit(k, 0)) = 1.0;
        h(r++) = 1.0;
      }
  // Slab (j, s): s u_j >= (1 + inner) delta - 1.
  for (int k = 0; k < N; ++k)
    for (int j = 0; j < nu; ++j)
      for (int s = 0; s < 2; ++s) {
        const double sgn = s == 0 ? 1.0 : -1.0;
        g(r, u_at(k, j)) = -sgn;
        g_delta(r, bit(k, 1 + 2 * j + s)) = 1.0 + kInnerFraction;
        h(r++) = 1.0;
      }
  for (int k = 1; k <= N; ++k)
    for (int i = 0; i < q; ++i) {
      for (int c = 0; c < n; ++c) g(r, x_at(k, c)) = h_n(i, c);
      h(r++) = 1.0 - tight(k, i);
    }

  // Epigraph z' P z <= t as ||(t - 1, 2 L'z)|| <= t + 1.
  Eigen::MatrixXd pz = Eigen::MatrixXd::Zero(nz, nz);
  const Eigen::MatrixXd ru = mc.u_max.asDiagonal() * mc.R_lqr * mc.u_max.asDiagonal();
  const Eigen::MatrixXd qx = d_inv * mc.Q_lqr * d_inv;
  for (int k = 0; k < N; ++k) {
    pz.block(u_at(k, 0), u_at(k, 0), nu, nu) = ru / mc.cost_scale;
    pz.block(x_at(k + 1, 0), x_at(k + 1, 0), n, n) = qx / mc.cost_scale;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(pz);
  if (llt.info() != Eigen::Success) throw InvalidInput("stage cost is not positive definite");
  const Eigen::MatrixXd lt = llt.matrixL().transpose();
  g(r, t_at) = -1.0;
  h(r++) = 1.0;
  g(r, t_at) = -1.0;
  h(r++) = -1.0;
  g.block(r, 0, nz, nz) = -2.0 * lt;

  base.G = std::move(g);
  base.h = std::move(h);
  base.H = Eigen::MatrixXd::Zero(rows_lin + rows_soc, n);
  base.cone = ConeSpec({{ConeKind::NonnegOrthant, rows_lin}, {ConeKind::SecondOrder, rows_soc}});

  MixedEncoding enc;
  enc.base = std::move(base);
  enc.c_delta = Eigen::VectorXd::Zero(m);
  enc.A_delta = Eigen::MatrixXd::Zero(N * n, m);
  enc.G_delta = std::move(g_delta);

  std::vector<OneHotGroup> groups;
  for (int k = 0; k < N; ++k) {
    OneHotGroup og;
    for (int b = 0; b < gsz; ++b) og.bits.push_back(bit(k, b));
    groups.push_back(std::move(og));
  }
  std::ostringstream name;
  name << "mdof-nr" << nr << "-N" << N << "-s" << mc.seed;
  ParametricProgram prog = ParametricProgram::from_mixed(name.str(), n, m, std::move(enc), std::move(groups));

  const Point bary = mc.theta_normalized.vertices().rowwise().mean();
  MixedIntegerOracle oracle(prog);
  if (oracle.find_feasible(bary).status != MinlpStatus::Optimal)
    throw HorizonInfeasible("MPC program infeasible at the barycenter of Theta");
  mc.program = prog;
  return prog;
}

McInstance generate_instance(int n_r, int horizon, std::uint64_t seed, RobustMode mode) {
  McInstance mc = make_mc_draft(n_r, horizon, seed, mode);
  assemble_mpc_program(mc);
  return mc;
}

Metadata McInstance::metadata() const {
  Metadata meta;
  meta.emplace_back("generator", "mdof");
  meta.emplace_back("seed", std::to_string(seed));
  meta.emplace_back("n_r", std::to_string(system.n_r));
  meta.emplace_back("horizon", std::to_string(horizon));
  meta.emplace_back("mode", to_string(mode));
  meta.emplace_back("w_bound", format_hex(w_bound));
  meta.emplace_back("omega_s", format_hex(discrete.omega_s));
  meta.emplace_back("sample_time", format_hex(discrete.sample_time));
  meta.emplace_back("theta_scale", format_hex(theta.scale));
  meta.emplace_back("u_max", hex_list(u_max));
  meta.emplace_back("state_scale", hex_list(state_scale));
  meta.emplace_back("cost_scale", format_hex(cost_scale));
  for (std::size_t i = 0; i < system.modes.size(); ++i) {
    const auto& md = system.modes[i];
    std::ostringstream os;
    os << "zeta " << format_hex(md.zeta) << " omega_n " << format_hex(md.omega_n) << " damping_rate "
       << format_hex(md.damping_rate) << " damped_frequency " << format_hex(md.damped_frequency);
    meta.emplace_back("pole" + std::to_string(i), os.str());
  }
  return meta;
}

}  // namespace commutree
