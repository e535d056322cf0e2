#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace commutree {

using Point = Eigen::VectorXd;

/// Boundary tolerance on barycentric weights: a point with all weights
/// >= -kMembershipTolerance is inside.
inline constexpr double kMembershipTolerance = 1e-9;

/// Weights at or below this are treated as zero when splitting, so a child
/// whose replaced vertex carries no weight is degenerate and dropped.
inline constexpr double kSplitWeightTolerance = 1e-10;

/// Vertex-representation polytope; vertices are the columns of a p x k matrix.
class Polytope {
 public:
  Polytope() = default;
  explicit Polytope(Eigen::MatrixXd vertices);

  int dim() const { return static_cast<int>(vertices_.rows()); }
  int num_vertices() const { return static_cast<int>(vertices_.cols()); }
  const Eigen::MatrixXd& vertices() const { return vertices_; }
  Point vertex(int i) const { return vertices_.col(i); }

 private:
  Eigen::MatrixXd vertices_;
};

/// p+1 points in R^p stored as columns. Degeneracy is checked by the
/// operations that need full rank, not by the constructor.
class Simplex {
 public:
  Simplex() = default;
  explicit Simplex(Eigen::MatrixXd vertices);

  int dim() const { return static_cast<int>(vertices_.rows()); }
  const Eigen::MatrixXd& vertices() const { return vertices_; }
  Point vertex(int i) const { return vertices_.col(i); }
  Eigen::MatrixXd edge_matrix() const;

 private:
  Eigen::MatrixXd vertices_;
};

struct LongestEdge {
  int i = 0;
  int j = 0;
  double length = 0.0;
};

struct SimplexMetrics {
  double volume = 0.0;
  Point barycenter;
  LongestEdge longest_edge;
};

struct BarycentricCoords {
  Eigen::VectorXd alpha;
  bool contains = false;
};

SimplexMetrics simplex_metrics(const Simplex& s);

/// Volume |det E| / p!; throws DegenerateSimplex when rank(E) < p.
double simplex_volume(const Simplex& s);

/// Longest vertex pair; ties go to the lexicographically smallest (i, j).
LongestEdge longest_edge(const Eigen::MatrixXd& vertices);

/// sigma_max / sigma_min of the edge matrix.
double condition_number(const Simplex& s);

/// Same for a lower-dimensional face given by k <= p+1 vertex columns;
/// a face with fewer than 3 vertices has condition number 1.
double face_condition_number(const Eigen::MatrixXd& vertices);

BarycentricCoords barycentric_coordinates(const Simplex& s, const Point& theta);

/// Barycentric weights of theta w.r.t. the affine hull of k vertex columns
/// (least squares when k < p+1). Exact for points in the hull.
Eigen::VectorXd affine_weights(const Eigen::MatrixXd& vertices, const Point& theta);

/// Membership test used by tree queries; counts as one test.
bool simplex_contains(const Simplex& s, const Point& theta);

std::vector<Simplex> delaunay_triangulate(const Polytope& poly);

/// Replace each vertex by theta in turn, keeping full-dimensional children.
std::vector<Simplex> split_at_point(const Simplex& s, const Point& theta);

/// Same as split_at_point for a k-vertex face with known affine weights of
/// the split point; children keep vertex order with one column replaced.
std::vector<Eigen::MatrixXd> split_face(const Eigen::MatrixXd& face, const Point& point,
                                        const Eigen::VectorXd& weights);

/// Children (v_i <- mid, v_j <- mid) for the longest edge (i, j).
std::pair<Simplex, Simplex> bisect_longest_edge(const Simplex& s);

double polytope_volume(const Polytope& poly);

/// True when the point columns affinely span R^p.
bool is_full_dimensional(const Eigen::MatrixXd& points);

}  // namespace commutree
