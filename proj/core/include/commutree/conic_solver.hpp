#pragma once

#include <Eigen/Dense>
#include <string>

#include "commutree/problem.hpp"

namespace commutree {

/// min c'x + c0  s.t.  A x = b,  h - G x in K.
struct ConicProblem {
  Eigen::VectorXd c;
  double c0 = 0.0;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::MatrixXd G;
  Eigen::VectorXd h;
  ConeSpec cone;

  int n() const { return static_cast<int>(c.size()); }
  /// Zero-size matrices are normalized to the right column counts.
  void normalize();
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

const char* to_string(SolveStatus s);

struct Residuals {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
};

struct SolveOutcome {
  SolveStatus status = SolveStatus::NumericalFailure;
  Eigen::VectorXd x;
  double value = 0.0;
  Residuals residuals;
  int iterations = 0;
  /// Dual multipliers when Optimal; an improving ray when Infeasible.
  Eigen::VectorXd y;
  Eigen::VectorXd z;

  bool optimal() const { return status == SolveStatus::Optimal; }
};

struct SolverSettings {
  int max_iterations = 200;
  double feas_tol = 1e-8;
  double abs_gap_tol = 1e-8;
  double rel_gap_tol = 1e-8;
  /// Fallback tolerances accepted when progress stalls.
  double reduced_tol = 1e-6;
  double step_fraction = 0.99;
  bool presolve = true;
  bool equilibrate = true;
};

SolveOutcome solve(ConicProblem problem, const SolverSettings& settings = {});

/// Fixed-commutation data with theta substituted.
ConicProblem substitute_theta(const ConicData& data, const Point& theta);

/// instantiate + substitute + solve. Throws InadmissibleCommutation.
SolveOutcome solve_fixed_commutation(const ParametricProgram& prog, const Point& theta,
                                     const Commutation& delta, const SolverSettings& settings = {});

namespace detail {

struct PresolveResult {
  ConicProblem reduced;
  /// Original index of each reduced column, and fixed values for the rest.
  std::vector<int> kept_columns;
  Eigen::VectorXd fixed_values;
  /// Set when presolve alone decides the status.
  bool decided = false;
  SolveStatus status = SolveStatus::Optimal;
};

PresolveResult presolve(const ConicProblem& problem);

/// The interior point method on an already presolved problem.
SolveOutcome solve_hsde(const ConicProblem& problem, const SolverSettings& settings);

}  // namespace detail

}  // namespace commutree
