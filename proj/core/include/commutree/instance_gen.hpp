#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "commutree/geometry.hpp"
#include "commutree/problem.hpp"
#include "commutree/program_io.hpp"

namespace commutree {

// ---- toys ----

struct ToyInstance {
  std::string name;
  ParametricProgram program;
  Polytope theta;
  std::string description;
};

/// toy1d: min u^2 s.t. theta + u = 0 with u in [-1, 0.2] (delta 0) or
/// [-0.2, 1] (delta 1) on Theta = [-1, 1]; V*_delta(theta) = theta^2.
ToyInstance make_toy1d();
/// toy1d with cost +0.1 for delta 1.
ToyInstance make_toy1d_offset();
/// Feasible sets [center - kappa, 1] (delta 0) and [-1, center + kappa]
/// (delta 1) on Theta = [-1, 1].
ToyInstance make_toy1d_kappa(double center, double kappa);
/// p = 2, three one-hot pieces of u = -theta, table encoding.
ToyInstance make_toy2d();
/// Named lookup: toy1d, toy1d-offset, toy2d. Throws InvalidInput.
ToyInstance make_toy(const std::string& name);
std::vector<ToyInstance> toy_instances();

/// Axis-aligned box as a polytope with 2^p vertices.
Polytope box_polytope(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);

// ---- random numbers ----

/// Portable seeded generator: mt19937_64 with explicit transforms (the
/// standard distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

// ---- oscillators ----

struct ModeData {
  double zeta = 0.0;
  double omega_n = 0.0;
  double damping_rate = 0.0;     // sigma = zeta * omega_n
  double damped_frequency = 0.0;  // omega_n sqrt(1 - zeta^2)
};

struct MdofSystem {
  int n_r = 0;
  Eigen::MatrixXd M, C, K, L;
  Eigen::MatrixXd T;       // modal matrix (orthogonal)
  Eigen::VectorXd Lambda;  // diag(2 zeta omega_n)
  Eigen::VectorXd Omega;   // diag(omega_n^2)
  Eigen::MatrixXd Gamma;   // T' M^{-1/2} L = I
  std::vector<ModeData> modes;
  Eigen::MatrixXd A, B, E;  // continuous, state (r, r')
};

struct DiscreteSystem {
  Eigen::MatrixXd Ad, Bd, Ed;
  double omega_s = 0.0;
  double sample_time = 0.0;
};

/// Deterministic for a fixed seed. Requires n_r >= 1.
MdofSystem generate_mdof(int n_r, std::uint64_t seed);

/// Exact zero-order hold of x'' + 2 zeta wn x' + wn^2 x = u over h:
/// returns [Phi | gamma] (2 x 3). Requires wn > 0.
Eigen::Matrix<double, 2, 3> oscillator_zoh(double zeta, double omega_n, double h);

/// Modal closed-form ZOH at omega_s = rate_multiplier * max |lambda(A)|.
DiscreteSystem discretize(const MdofSystem& sys, double rate_multiplier = 10.0);

struct LqrResult {
  Eigen::MatrixXd K;
  Eigen::MatrixXd P;
  int iterations = 0;
  double residual = 0.0;
};

/// DARE by fixed-point iteration; throws RiccatiDivergence.
LqrResult lqr_synthesis(const Eigen::MatrixXd& Ad, const Eigen::MatrixXd& Bd,
                        const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                        int max_iterations = 200000, double tolerance = 1e-10);

// ---- parameter set ----

/// {x : H x <= 1} with vertex list; H and vertices describe the same set.
struct InvariantSet {
  Polytope vertices;
  Eigen::MatrixXd H;
  double scale = 0.0;
};

struct ThetaOptions {
  double start = 1.0;
  double shrink = 0.5;
  int max_steps = 60;
  /// Enlargement of the smallest invariant scale found (1 = none).
  double margin = 1.0;
  double w_bound = 1e-3;
  /// Largest template polygon order for complex closed-loop modes.
  int max_polygon = 64;
};

/// Template set in the closed-loop real modal basis (interval per real
/// mode, regular polygon per complex pair). Throws NoInvariantBoxFound.
InvariantSet construct_theta(const Eigen::MatrixXd& A_cl, const Eigen::MatrixXd& Ed,
                             const ThetaOptions& opts = {});

/// Every vertex v and disturbance vertex w: H (A_cl v + Ed w) <= 1.
bool is_robust_invariant(const Eigen::MatrixXd& A_cl, const Eigen::MatrixXd& Ed, double w_bound,
                         const Eigen::MatrixXd& H, const Eigen::MatrixXd& vertices,
                         double tolerance = 1e-12);

// ---- MPC program ----

enum class RobustMode { Nominal, BoxTightened };

const char* to_string(RobustMode m);
std::optional<RobustMode> parse_robust_mode(const std::string& s);

struct McInstance {
  std::uint64_t seed = 0;
  int horizon = 3;
  RobustMode mode = RobustMode::BoxTightened;
  MdofSystem system;
  DiscreteSystem discrete;
  Eigen::MatrixXd Q_lqr, R_lqr;
  LqrResult lqr;
  InvariantSet theta;     // physical coordinates
  double w_bound = 1e-3;
  Eigen::VectorXd u_max;  // per input
  /// Normalization of the assembled program: theta = state_scale .* x,
  /// u = u_max .* u_normalized, cost divided by cost_scale.
  Eigen::VectorXd state_scale;
  double cost_scale = 1.0;
  Polytope theta_normalized;
  std::optional<ParametricProgram> program;

  Metadata metadata() const;
};

/// Draft instance (system, LQR, Theta, u_max) without the program.
McInstance make_mc_draft(int n_r, int horizon, std::uint64_t seed, RobustMode mode,
                         double theta_margin = 4.0);

/// Fills draft.program. Throws HorizonInfeasible when the program is
/// infeasible at the barycenter of Theta.
ParametricProgram assemble_mpc_program(McInstance& draft);

/// make_mc_draft + assemble_mpc_program.
McInstance generate_instance(int n_r, int horizon, std::uint64_t seed, RobustMode mode);

/// Per-step tightening of each H row: sum_{j<k} ||h' Ad^{k-1-j} Ed||_1 w.
/// Row k of the result (k = 0..N) belongs to x_k.
Eigen::MatrixXd tightening_offsets(const Eigen::MatrixXd& Ad, const Eigen::MatrixXd& Ed,
                                   const Eigen::MatrixXd& H, int horizon, double w_bound);

}  // namespace commutree
