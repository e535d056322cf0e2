#include <doctest.h>

#include <cmath>
#include <random>

#include "commutree/errors.hpp"
#include "commutree/geometry.hpp"
#include "oracles.hpp"

using namespace commutree;

namespace {

Eigen::MatrixXd cols(std::initializer_list<std::initializer_list<double>> pts) {
  const int k = static_cast<int>(pts.size());
  const int p = static_cast<int>(pts.begin()->size());
  Eigen::MatrixXd m(p, k);
  int j = 0;
  for (const auto& pt : pts) {
    int i = 0;
    for (double v : pt) m(i++, j) = v;
    ++j;
  }
  return m;
}

Simplex unit2() { return Simplex(cols({{0, 0}, {1, 0}, {0, 1}})); }

Simplex random_simplex(std::mt19937_64& gen, int p) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd v(p, p + 1);
  for (int i = 0; i < v.size(); ++i) v.data()[i] = n(gen);
  return Simplex(v);
}

int containing(const std::vector<Simplex>& cells, const Point& x) {
  int count = 0;
  for (const auto& c : cells) count += simplex_contains(c, x) ? 1 : 0;
  return count;
}

double facet_distance(const Simplex& s, const Point& x) {
  const auto bc = barycentric_coordinates(s, x);
  return bc.alpha.cwiseAbs().minCoeff();
}

}  // namespace

TEST_CASE("simplex metrics") {
  const auto m = simplex_metrics(unit2());
  CHECK(m.volume == doctest::Approx(0.5));
  CHECK(m.barycenter(0) == doctest::Approx(1.0 / 3));
  CHECK(m.barycenter(1) == doctest::Approx(1.0 / 3));
  CHECK(m.longest_edge.i == 1);
  CHECK(m.longest_edge.j == 2);
  CHECK(m.longest_edge.length == doctest::Approx(std::sqrt(2.0)));

  const auto seg = simplex_metrics(Simplex(cols({{-1}, {1}})));
  CHECK(seg.volume == doctest::Approx(2.0));
  CHECK(seg.barycenter(0) == doctest::Approx(0.0));
  CHECK(seg.longest_edge.length == doctest::Approx(2.0));

  CHECK_THROWS_AS(simplex_metrics(Simplex(cols({{0, 0}, {1, 1}, {2, 2}}))), DegenerateSimplex);
}

TEST_CASE("longest edge ties go to the smallest index pair") {
  const auto e = longest_edge(cols({{0, 0}, {1, 0}, {0, 1}, {1, 1}}));
  CHECK(e.i == 0);
  CHECK(e.j == 3);
  const auto sq = longest_edge(cols({{0}, {1}, {2}}));
  CHECK(sq.i == 0);
  CHECK(sq.j == 2);
}

TEST_CASE("condition number") {
  CHECK(condition_number(unit2()) == doctest::Approx(1.0));
  CHECK(condition_number(Simplex(cols({{0, 0}, {1, 0}, {0, 0.01}}))) == doctest::Approx(100.0));
  CHECK_THROWS_AS(condition_number(Simplex(cols({{0, 0}, {1, 0}, {2, 0}}))), DegenerateSimplex);

  std::mt19937_64 gen(3);
  for (int t = 0; t < 50; ++t) {
    const Simplex s = random_simplex(gen, 3);
    const double rho = condition_number(s);
    CHECK(rho >= 1.0);
    const Eigen::Matrix3d rot =
        Eigen::AngleAxisd(0.3 * t, Eigen::Vector3d(1, 2, 3).normalized()).toRotationMatrix();
    const double rotated = condition_number(Simplex(rot * s.vertices()));
    CHECK(std::abs(rotated - rho) <= 1e-9 * rho);
  }
}

TEST_CASE("barycentric coordinates") {
  const Simplex s = unit2();
  const auto at_bary = barycentric_coordinates(s, simplex_metrics(s).barycenter);
  CHECK(at_bary.contains);
  for (int i = 0; i < 3; ++i) CHECK(at_bary.alpha(i) == doctest::Approx(1.0 / 3));

  const auto at_vertex = barycentric_coordinates(s, s.vertex(1));
  CHECK(at_vertex.contains);
  CHECK(at_vertex.alpha(1) == doctest::Approx(1.0));
  CHECK(std::abs(at_vertex.alpha(0)) < 1e-12);

  const auto outside = barycentric_coordinates(s, Point::Constant(2, 1.0));
  CHECK_FALSE(outside.contains);
  CHECK(outside.alpha.minCoeff() < 0.0);

  std::mt19937_64 gen(5);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const Simplex r = random_simplex(gen, 4);
    Point x(4);
    for (int i = 0; i < 4; ++i) x(i) = n(gen);
    const auto bc = barycentric_coordinates(r, x);
    CHECK(std::abs(bc.alpha.sum() - 1.0) <= 1e-12 * (1.0 + bc.alpha.cwiseAbs().sum()));
    CHECK((r.vertices() * bc.alpha - x).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("delaunay triangulation") {
  const auto single = delaunay_triangulate(Polytope(unit2().vertices()));
  REQUIRE(single.size() == 1);
  CHECK(simplex_volume(single[0]) == doctest::Approx(0.5));

  const auto square = delaunay_triangulate(Polytope(cols({{0, 0}, {1, 0}, {0, 1}, {1, 1}})));
  REQUIRE(square.size() == 2);
  CHECK(simplex_volume(square[0]) == doctest::Approx(0.5));
  CHECK(simplex_volume(square[1]) == doctest::Approx(0.5));

  CHECK_THROWS_AS(delaunay_triangulate(Polytope(cols({{0, 0}, {1, 1}, {2, 2}, {3, 3}}))),
                  DegenerateInput);
}

TEST_CASE("hexagon triangulation against Monte-Carlo area") {
  const Eigen::MatrixXd hex = testing::regular_polygon(6);
  const auto cells = delaunay_triangulate(Polytope(hex));
  CHECK(cells.size() == 4);
  double total = 0.0;
  for (const auto& c : cells) total += simplex_volume(c);

  const auto in_hexagon = [&](const Eigen::VectorXd& x) {
    for (int i = 0; i < 6; ++i) {
      const Eigen::Vector2d a = hex.col(i);
      const Eigen::Vector2d b = hex.col((i + 1) % 6);
      if ((b - a)(0) * (x(1) - a(1)) - (b - a)(1) * (x(0) - a(0)) < 0.0) return false;
    }
    return true;
  };
  const Eigen::Vector2d lo(-1, -1), hi(1, 1);
  const double area = 4.0 * testing::monte_carlo_fraction(lo, hi, 1'000'000, 11, in_hexagon);
  CHECK(std::abs(total - area) < 0.01);
  CHECK(total == doctest::Approx(polytope_volume(Polytope(hex))).epsilon(1e-12));

  std::mt19937_64 gen(13);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int checked = 0;
  for (int t = 0; t < 10'000; ++t) {
    const Eigen::Vector2d x(u(gen), u(gen));
    const int count = containing(cells, x);
    if (!in_hexagon(x)) continue;
    CHECK(count >= 1);
    double dmin = 1.0;
    for (const auto& c : cells) dmin = std::min(dmin, facet_distance(c, x));
    if (dmin > 1e-7) {
      CHECK(count == 1);
      ++checked;
    }
  }
  CHECK(checked > 5000);
}

TEST_CASE("split at point") {
  const Simplex s = unit2();
  const auto at_bary = split_at_point(s, simplex_metrics(s).barycenter);
  REQUIRE(at_bary.size() == 3);
  for (const auto& c : at_bary) CHECK(simplex_volume(c) == doctest::Approx(0.5 / 3));

  const Point mid = 0.5 * (s.vertex(1) + s.vertex(2));
  const auto at_mid = split_at_point(s, mid);
  REQUIRE(at_mid.size() == 2);
  for (const auto& c : at_mid) CHECK(simplex_volume(c) == doctest::Approx(0.25));

  const auto at_vertex = split_at_point(s, s.vertex(0));
  REQUIRE(at_vertex.size() == 1);
  CHECK(simplex_volume(at_vertex[0]) == doctest::Approx(0.5));

  CHECK_THROWS_AS(split_at_point(s, Point::Constant(2, 1.0)), PointOutside);
}

TEST_CASE("longest-edge bisection halves volume") {
  std::mt19937_64 gen(17);
  for (int t = 0; t < 1000; ++t) {
    const int p = 1 + t % 4;
    const Simplex s = random_simplex(gen, p);
    const double vol = simplex_volume(s);
    const auto [a, b] = bisect_longest_edge(s);
    CHECK(std::abs(simplex_volume(a) - vol / 2) <= 1e-9 * vol);
    CHECK(std::abs(simplex_volume(b) - vol / 2) <= 1e-9 * vol);
  }
}

TEST_CASE("split coverage") {
  std::mt19937_64 gen(19);
  const Simplex s = random_simplex(gen, 3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd w(4);
  for (int i = 0; i < 4; ++i) w(i) = -std::log(u(gen));
  w /= w.sum();
  const auto children = split_at_point(s, s.vertices() * w);
  REQUIRE(children.size() == 4);
  double total = 0.0;
  for (const auto& c : children) total += simplex_volume(c);
  CHECK(std::abs(total - simplex_volume(s)) <= 1e-9 * simplex_volume(s));

  for (int t = 0; t < 10'000; ++t) {
    for (int i = 0; i < 4; ++i) w(i) = -std::log(u(gen));
    w /= w.sum();
    const Point x = s.vertices() * w;
    const int count = containing(children, x);
    CHECK(count >= 1);
    double dmin = 1.0;
    for (const auto& c : children) dmin = std::min(dmin, facet_distance(c, x));
    if (dmin > 1e-7) CHECK(count == 1);
  }
}
