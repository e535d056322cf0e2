#include "oracles.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace commutree::testing {

namespace {

bool next_combination(std::vector<int>& idx, int n) {
  const int k = static_cast<int>(idx.size());
  for (int i = k - 1; i >= 0; --i) {
    if (idx[i] < n - k + i) {
      ++idx[i];
      for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace

std::optional<double> brute_force_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& G,
                                     const Eigen::VectorXd& h, double feas_tol) {
  const int n = static_cast<int>(c.size());
  const int rows = static_cast<int>(G.rows());
  if (rows < n) return std::nullopt;
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  std::optional<double> best;
  do {
    Eigen::MatrixXd Gs(n, n);
    Eigen::VectorXd hs(n);
    for (int i = 0; i < n; ++i) {
      Gs.row(i) = G.row(idx[i]);
      hs(i) = h(idx[i]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(Gs);
    if (lu.rank() < n) continue;
    const Eigen::VectorXd x = lu.solve(hs);
    if (((G * x - h).array() > feas_tol * (1.0 + h.cwiseAbs().maxCoeff())).any()) continue;
    const double v = c.dot(x);
    if (!best || v < *best) best = v;
  } while (next_combination(idx, rows));
  return best;
}

Eigen::MatrixXd expm_series(const Eigen::MatrixXd& A, int terms) {
  const double norm = A.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Eigen::MatrixXd As = A / std::ldexp(1.0, squarings);
  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(A.rows(), A.cols());
  Eigen::MatrixXd term = result;
  for (int k = 1; k <= terms; ++k) {
    term = term * As / k;
    result += term;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

Eigen::MatrixXd zoh_series(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double h) {
  const int n = static_cast<int>(A.rows());
  const int m = static_cast<int>(B.cols());
  Eigen::MatrixXd big = Eigen::MatrixXd::Zero(n + m, n + m);
  big.topLeftCorner(n, n) = A * h;
  big.topRightCorner(n, m) = B * h;
  return expm_series(big).topRows(n);
}

double scalar_dare(double a, double b, double q, double r) {
  const double qa = b * b;
  const double qb = r - a * a * r - q * b * b;
  const double qc = -q * r;
  if (qa == 0.0) return -qc / qb;
  return (-qb + std::sqrt(qb * qb - 4.0 * qa * qc)) / (2.0 * qa);
}

Eigen::MatrixXd regular_polygon(int k, double radius) {
  Eigen::MatrixXd v(2, k);
  for (int i = 0; i < k; ++i) {
    const double a = 2.0 * std::numbers::pi * i / k;
    v(0, i) = radius * std::cos(a);
    v(1, i) = radius * std::sin(a);
  }
  return v;
}

}  // namespace commutree::testing
