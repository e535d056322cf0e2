#include <algorithm>
#include <limits>

#include "commutree/errors.hpp"
#include "commutree/phase2.hpp"

namespace commutree {

namespace {

double safe_rho(const Eigen::MatrixXd& face) {
  try {
    return face_condition_number(face);
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

bool within_keep_out(const Eigen::MatrixXd& face, const Point& point, double keep_out) {
  for (int j = 0; j < face.cols(); ++j)
    if ((face.col(j) - point).norm() <= keep_out) return true;
  return false;
}

std::vector<Eigen::MatrixXd> snap(const Eigen::MatrixXd& face, const SplitPointFn& split_point,
                                  double rho_max, double keep_out) {
  const int k = static_cast<int>(face.cols());
  if (k < 2) return {face};
  const auto sp = split_point(face);
  if (!sp) return {face};
  const auto& [point, weights] = *sp;
  if (within_keep_out(face, point, keep_out)) return {face};

  std::vector<Eigen::MatrixXd> children;
  std::vector<int> replaced;
  for (int j = 0; j < k; ++j) {
    if (weights(j) <= kSplitWeightTolerance) continue;
    Eigen::MatrixXd child = face;
    child.col(j) = point;
    children.push_back(std::move(child));
    replaced.push_back(j);
  }
  if (children.size() <= 1) return {face};

  int worst = 0;
  double worst_rho = -1.0;
  for (std::size_t i = 0; i < children.size(); ++i) {
    const double r = safe_rho(children[i]);
    if (r > worst_rho) {
      worst_rho = r;
      worst = static_cast<int>(i);
    }
  }
  if (worst_rho <= rho_max) return children;

  // Re-split the facet opposite the vertex the worst child replaced and cone
  // the result back to that vertex.
  const int j = replaced[static_cast<std::size_t>(worst)];
  Eigen::MatrixXd facet(face.rows(), k - 1);
  for (int c = 0, t = 0; c < k; ++c)
    if (c != j) facet.col(t++) = face.col(c);
  const auto sub = snap(facet, split_point, rho_max, keep_out);
  if (sub.size() <= 1) return {face};
  std::vector<Eigen::MatrixXd> coned;
  for (const auto& d : sub) {
    Eigen::MatrixXd child(face.rows(), k);
    for (int c = 0, t = 0; c < k; ++c) child.col(c) = c == j ? face.col(j) : d.col(t++);
    if (safe_rho(child) > rho_max) return {face};
    coned.push_back(std::move(child));
  }
  return coned;
}

}  // namespace

std::vector<Eigen::MatrixXd> triangulate_snap_with(const Eigen::MatrixXd& face,
                                                   const SplitPointFn& split_point,
                                                   double rho_max, double keep_out) {
  return snap(face, split_point, rho_max, keep_out);
}

Point constrained_split_point(MixedIntegerOracle& oracle, const Commutation& delta,
                              const OverApproximator& oa, const Eigen::MatrixXd& face_vertices) {
  if (face_vertices.cols() < 2) throw InvalidInput("a split face needs at least two vertices");
  const CollapsedResult res = solve_collapsed(oracle, delta, &oa, face_vertices);
  if (res.status != SolveStatus::Optimal)
    throw Error(std::string("split point subproblem failed: ") + to_string(res.status));
  return res.theta;
}

std::vector<Simplex> triangulate_snap(MixedIntegerOracle& oracle, const OverApproximator& oa,
                                      const Simplex& r, const Commutation& delta,
                                      const Phase2Config& cfg, double keep_out) {
  const SplitPointFn fn =
      [&](const Eigen::MatrixXd& face) -> std::optional<std::pair<Point, Eigen::VectorXd>> {
    const CollapsedResult res = solve_collapsed(oracle, delta, &oa, face);
    if (res.status != SolveStatus::Optimal) return std::nullopt;
    Eigen::VectorXd w = res.alpha.cwiseMax(0.0);
    const double s = w.sum();
    if (!(s > 0)) return std::nullopt;
    w /= s;
    return std::pair<Point, Eigen::VectorXd>{face * w, w};
  };
  std::vector<Simplex> out;
  for (auto& m : triangulate_snap_with(r.vertices(), fn, cfg.rho_max, keep_out))
    out.emplace_back(std::move(m));
  return out;
}

}  // namespace commutree
