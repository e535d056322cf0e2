// Delaunay triangulation as the lower convex hull of lifted points.
//
// Each point x is lifted to (x, |x|^2 + w) with a tiny deterministic weight w
// per input index. The weights break cospherical ties (a regular
// triangulation, which is all the partitioner needs) so the incremental hull
// never sees coplanar facets.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>

#include "commutree/errors.hpp"
#include "commutree/geometry.hpp"

namespace commutree {

namespace {

struct Facet {
  std::vector<int> verts;  // sorted
  Eigen::VectorXd normal;  // unit, outward
  double offset = 0.0;
  bool alive = true;
};

double hash_unit(std::uint64_t i) {
  std::uint64_t z = i + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

Facet make_facet(const Eigen::MatrixXd& pts, std::vector<int> verts, const Eigen::VectorXd& inside) {
  std::sort(verts.begin(), verts.end());
  const int d = static_cast<int>(pts.rows());
  Eigen::MatrixXd e(d - 1, d);
  for (int k = 1; k < d; ++k) e.row(k - 1) = (pts.col(verts[k]) - pts.col(verts[0])).transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(e, Eigen::ComputeFullV);
  Facet f;
  f.normal = svd.matrixV().col(d - 1);
  f.offset = f.normal.dot(pts.col(verts[0]));
  if (f.normal.dot(inside) - f.offset > 0) {
    f.normal = -f.normal;
    f.offset = -f.offset;
  }
  f.verts = std::move(verts);
  return f;
}

std::vector<int> initial_simplex(const Eigen::MatrixXd& pts, double tol) {
  const int d = static_cast<int>(pts.rows());
  std::vector<int> chosen{0};
  std::vector<Eigen::VectorXd> basis;
  while (static_cast<int>(chosen.size()) < d + 1) {
    int best = -1;
    double best_dist = tol;
    for (int i = 0; i < pts.cols(); ++i) {
      Eigen::VectorXd r = pts.col(i) - pts.col(chosen[0]);
      for (const auto& b : basis) r -= b.dot(r) * b;
      const double dist = r.norm();
      if (dist > best_dist) {
        best_dist = dist;
        best = i;
      }
    }
    if (best < 0) throw DegenerateInput("polytope is not full-dimensional");
    Eigen::VectorXd r = pts.col(best) - pts.col(chosen[0]);
    for (const auto& b : basis) r -= b.dot(r) * b;
    basis.push_back(r.normalized());
    chosen.push_back(best);
  }
  return chosen;
}

}  // namespace

std::vector<Simplex> delaunay_triangulate(const Polytope& poly) {
  const Eigen::MatrixXd& x = poly.vertices();
  const int p = poly.dim();
  const int n = poly.num_vertices();
  if (!is_full_dimensional(x)) throw DegenerateInput("polytope is not full-dimensional");
  if (n == p + 1) return {Simplex(x)};

  // Center and normalize so lifting heights are O(1).
  const Eigen::VectorXd center = x.rowwise().mean();
  Eigen::MatrixXd y = x.colwise() - center;
  const double scale = y.cwiseAbs().maxCoeff();
  y /= scale;

  const int d = p + 1;
  Eigen::MatrixXd pts(d, n);
  pts.topRows(p) = y;
  for (int i = 0; i < n; ++i)
    pts(p, i) = y.col(i).squaredNorm() + 1e-6 * hash_unit(static_cast<std::uint64_t>(i));

  const double tol = 1e-10;
  const std::vector<int> init = initial_simplex(pts, tol);
  Eigen::VectorXd inside = Eigen::VectorXd::Zero(d);
  for (int i : init) inside += pts.col(i);
  inside /= static_cast<double>(d + 1);

  std::vector<Facet> facets;
  for (int skip = 0; skip <= d; ++skip) {
    std::vector<int> v;
    for (int k = 0; k <= d; ++k)
      if (k != skip) v.push_back(init[k]);
    facets.push_back(make_facet(pts, v, inside));
  }

  std::vector<bool> used(n, false);
  for (int i : init) used[i] = true;
  for (int q = 0; q < n; ++q) {
    if (used[q]) continue;
    std::map<std::vector<int>, int> ridge_count;
    bool any_visible = false;
    for (auto& f : facets) {
      if (!f.alive) continue;
      if (f.normal.dot(pts.col(q)) - f.offset <= tol) continue;
      any_visible = true;
      f.alive = false;
      for (int skip = 0; skip < d; ++skip) {
        std::vector<int> ridge;
        for (int k = 0; k < d; ++k)
          if (k != skip) ridge.push_back(f.verts[k]);
        ++ridge_count[ridge];
      }
    }
    if (!any_visible) continue;
    for (const auto& [ridge, count] : ridge_count) {
      if (count != 1) continue;
      std::vector<int> v = ridge;
      v.push_back(q);
      facets.push_back(make_facet(pts, v, inside));
    }
    std::erase_if(facets, [](const Facet& f) { return !f.alive; });
  }

  std::vector<std::vector<int>> lower;
  for (const auto& f : facets)
    if (f.normal(p) < -1e-9) lower.push_back(f.verts);
  std::sort(lower.begin(), lower.end());

  std::vector<Simplex> out;
  for (const auto& verts : lower) {
    Eigen::MatrixXd v(p, d);
    for (int k = 0; k < d; ++k) v.col(k) = x.col(verts[k]);
    Simplex s(std::move(v));
    Eigen::MatrixXd e = s.edge_matrix() / scale;
    if (std::fabs(e.determinant()) < 1e-12) continue;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace commutree
