#include "commutree/geometry.hpp"

#include <cmath>
#include <limits>

#include "commutree/errors.hpp"

namespace commutree {

namespace {

double factorial(int p) {
  double f = 1.0;
  for (int k = 2; k <= p; ++k) f *= k;
  return f;
}

void require_simplex_shape(const Eigen::MatrixXd& v) {
  if (v.rows() < 1 || v.cols() != v.rows() + 1)
    throw InvalidInput("a simplex in R^p needs exactly p+1 vertices");
}

// Relative rank threshold on singular values of the edge matrix.
constexpr double kRankTolerance = 1e-13;

}  // namespace

Polytope::Polytope(Eigen::MatrixXd vertices) : vertices_(std::move(vertices)) {
  if (vertices_.rows() < 1 || vertices_.cols() < vertices_.rows() + 1)
    throw InvalidInput("a polytope in R^p needs at least p+1 vertices");
  if (!vertices_.allFinite()) throw InvalidInput("polytope vertices must be finite");
}

Simplex::Simplex(Eigen::MatrixXd vertices) : vertices_(std::move(vertices)) {
  require_simplex_shape(vertices_);
  if (!vertices_.allFinite()) throw InvalidInput("simplex vertices must be finite");
}

Eigen::MatrixXd Simplex::edge_matrix() const {
  const int p = dim();
  Eigen::MatrixXd e(p, p);
  for (int k = 0; k < p; ++k) e.col(k) = vertices_.col(k + 1) - vertices_.col(0);
  return e;
}

LongestEdge longest_edge(const Eigen::MatrixXd& v) {
  LongestEdge best{0, 1, -1.0};
  for (int i = 0; i < v.cols(); ++i) {
    for (int j = i + 1; j < v.cols(); ++j) {
      const double len = (v.col(i) - v.col(j)).norm();
      if (len > best.length) best = {i, j, len};
    }
  }
  return best;
}

double simplex_volume(const Simplex& s) {
  const Eigen::MatrixXd e = s.edge_matrix();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(e);
  const auto& sv = svd.singularValues();
  if (sv(0) == 0.0 || sv(sv.size() - 1) <= kRankTolerance * sv(0))
    throw DegenerateSimplex("simplex edge matrix is rank deficient");
  return std::fabs(e.determinant()) / factorial(s.dim());
}

SimplexMetrics simplex_metrics(const Simplex& s) {
  SimplexMetrics m;
  m.volume = simplex_volume(s);
  m.barycenter = s.vertices().rowwise().mean();
  m.longest_edge = longest_edge(s.vertices());
  return m;
}

double face_condition_number(const Eigen::MatrixXd& v) {
  const int k = static_cast<int>(v.cols());
  if (k < 3) return 1.0;
  Eigen::MatrixXd e(v.rows(), k - 1);
  for (int c = 1; c < k; ++c) e.col(c - 1) = v.col(c) - v.col(0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(e);
  const auto& sv = svd.singularValues();
  const double lo = sv(sv.size() - 1);
  if (lo < 1e-300) throw DegenerateSimplex("face has zero smallest singular value");
  return sv(0) / lo;
}

double condition_number(const Simplex& s) {
  if (s.dim() == 1) {
    if (std::fabs(s.vertices()(0, 1) - s.vertices()(0, 0)) < 1e-300)
      throw DegenerateSimplex("segment has zero length");
    return 1.0;
  }
  return face_condition_number(s.vertices());
}

BarycentricCoords barycentric_coordinates(const Simplex& s, const Point& theta) {
  const int p = s.dim();
  if (theta.size() != p) throw InvalidInput("point dimension does not match simplex");
  Eigen::MatrixXd a(p + 1, p + 1);
  a.topRows(p) = s.vertices();
  a.row(p).setOnes();
  Eigen::VectorXd rhs(p + 1);
  rhs << theta, 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible()) throw DegenerateSimplex("simplex is degenerate");
  BarycentricCoords out;
  out.alpha = lu.solve(rhs);
  out.contains = out.alpha.minCoeff() >= -kMembershipTolerance;
  return out;
}

Eigen::VectorXd affine_weights(const Eigen::MatrixXd& v, const Point& theta) {
  const int k = static_cast<int>(v.cols());
  Eigen::MatrixXd a(v.rows() + 1, k);
  a.topRows(v.rows()) = v;
  a.bottomRows(1).setOnes();
  Eigen::VectorXd rhs(v.rows() + 1);
  rhs << theta, 1.0;
  return a.colPivHouseholderQr().solve(rhs);
}

bool simplex_contains(const Simplex& s, const Point& theta) {
  return barycentric_coordinates(s, theta).contains;
}

std::vector<Eigen::MatrixXd> split_face(const Eigen::MatrixXd& face, const Point& point,
                                        const Eigen::VectorXd& weights) {
  std::vector<Eigen::MatrixXd> children;
  for (int i = 0; i < face.cols(); ++i) {
    if (weights(i) <= kSplitWeightTolerance) continue;
    Eigen::MatrixXd child = face;
    child.col(i) = point;
    children.push_back(std::move(child));
  }
  return children;
}

std::vector<Simplex> split_at_point(const Simplex& s, const Point& theta) {
  const BarycentricCoords bc = barycentric_coordinates(s, theta);
  if (!bc.contains) throw PointOutside("split point lies outside the simplex");
  std::vector<Simplex> out;
  for (auto& child : split_face(s.vertices(), theta, bc.alpha)) out.emplace_back(std::move(child));
  return out;
}

std::pair<Simplex, Simplex> bisect_longest_edge(const Simplex& s) {
  const LongestEdge e = longest_edge(s.vertices());
  const Point mid = 0.5 * (s.vertex(e.i) + s.vertex(e.j));
  Eigen::MatrixXd a = s.vertices();
  Eigen::MatrixXd b = s.vertices();
  a.col(e.i) = mid;
  b.col(e.j) = mid;
  return {Simplex(std::move(a)), Simplex(std::move(b))};
}

double polytope_volume(const Polytope& poly) {
  double vol = 0.0;
  for (const auto& s : delaunay_triangulate(poly)) vol += simplex_volume(s);
  return vol;
}

bool is_full_dimensional(const Eigen::MatrixXd& points) {
  const int p = static_cast<int>(points.rows());
  if (points.cols() < p + 1) return false;
  Eigen::MatrixXd d = points.rightCols(points.cols() - 1).colwise() - points.col(0);
  const double scale = d.cwiseAbs().maxCoeff();
  if (scale == 0.0) return false;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(d / scale);
  lu.setThreshold(1e-12);
  return lu.rank() == p;
}

}  // namespace commutree
