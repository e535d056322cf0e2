#include <doctest.h>

#include <cmath>
#include <sstream>

#include "commutree/errors.hpp"
#include "commutree/instance_gen.hpp"
#include "commutree/phase1.hpp"
#include "commutree/phase2.hpp"
#include "commutree/verify.hpp"

using namespace commutree;

namespace {

Eigen::MatrixXd seg(double a, double b) {
  Eigen::MatrixXd v(1, 2);
  v << a, b;
  return v;
}

Commutation bits(const char* s) { return Commutation::from_string(s); }

double volume_of(const Eigen::MatrixXd& v) { return simplex_volume(Simplex(v)); }

PartitionTree phase1_tree(MixedIntegerOracle& oracle, const Polytope& theta) {
  return build_partition(oracle, theta).tree;
}

}  // namespace

TEST_CASE("over-approximator interpolates vertex values") {
  Eigen::VectorXd vals(2);
  vals << 0.0, 1.0;
  const OverApproximator oa(seg(0, 1), vals);
  CHECK(over_approx_value(oa, Point::Constant(1, 0.5)) == doctest::Approx(0.5));
  CHECK(over_approx_value(oa, Point::Constant(1, 1.0)) == 1.0);
  CHECK_THROWS_AS(oa.value(Point::Constant(1, 1.5)), PointOutside);
  CHECK(oa.extend(Point::Constant(1, 1.5)) == doctest::Approx(1.5));

  Eigen::MatrixXd tri(2, 3);
  tri << 0, 2, 0, 0, 0, 3;
  Eigen::VectorXd tv(3);
  tv << 1.0, 4.0, -2.0;
  const OverApproximator t(tri, tv);
  CHECK(t.value(tri.rowwise().mean()) == doctest::Approx(1.0));
}

TEST_CASE("over-approximator dominates the value function") {
  const auto toy = make_toy2d();
  MixedIntegerOracle oracle(toy.program);
  Rng rng(21);
  Eigen::MatrixXd tri(2, 3);
  tri << 0.0, 0.9, 0.0, 0.0, 0.0, 0.9;
  const auto delta = bits("100");
  const auto oa = build_over_approximator(oracle, tri, delta);
  for (int j = 0; j < 3; ++j) {
    CHECK(std::abs(oa.value(tri.col(j)) - oracle.solve_fixed(tri.col(j), delta).value) <= 1e-7);
  }
  for (int t = 0; t < 1000; ++t) {
    const Point th = sample_simplex(tri, rng);
    const auto r = oracle.solve_fixed(th, delta);
    REQUIRE(r.optimal());
    CHECK(oa.value(th) >= r.value - 1e-7);
  }
}

TEST_CASE("error bounds on toy1d-offset follow the calculus oracle") {
  const auto toy = make_toy1d_offset();
  MixedIntegerOracle oracle(toy.program);
  const Eigen::MatrixXd r = seg(0.0, 0.2);
  const auto oa = build_over_approximator(oracle, r, bits("1"));
  CHECK(oa.values()(0) == doctest::Approx(0.1).epsilon(1e-6));
  CHECK(oa.values()(1) == doctest::Approx(0.14).epsilon(1e-6));

  Phase2Config cfg;
  const auto eb = compute_error_bounds(oracle, Simplex(r), bits("1"), oa, {bits("0")}, cfg);
  CHECK(eb.status == ErrorBoundStatus::Bounded);
  CHECK(eb.e_abs == doctest::Approx(0.11).epsilon(1e-5));
  CHECK(eb.arg_theta(0) == doctest::Approx(0.1).epsilon(1e-4));
  REQUIRE(eb.arg_delta.has_value());
  CHECK(*eb.arg_delta == bits("0"));
  CHECK(eb.denominator == doctest::Approx(0.1).epsilon(1e-6));
  CHECK(eb.e_rel == doctest::Approx(1.1).epsilon(1e-4));
  CHECK(eb.unresolved == 0);

  // Sampled true error never exceeds the bound.
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    const Point th = sample_simplex(r, rng);
    const auto own = oracle.solve_fixed(th, bits("1"));
    const auto other = oracle.solve_fixed(th, bits("0"));
    REQUIRE(own.optimal());
    REQUIRE(other.optimal());
    CHECK(own.value - other.value <= eb.e_abs + 1e-6);
  }
}

TEST_CASE("no competitor and degenerate denominator") {
  const auto toy = make_toy1d();
  MixedIntegerOracle oracle(toy.program);
  Phase2Config cfg;
  const Eigen::MatrixXd right = seg(0.5, 1.0);
  const auto oa = build_over_approximator(oracle, right, bits("0"));
  const auto none = compute_error_bounds(oracle, Simplex(right), bits("0"), oa, {bits("1")}, cfg);
  CHECK(none.status == ErrorBoundStatus::NoCompetitor);

  // Inside the overlap the value function reaches zero.
  const Eigen::MatrixXd mid = seg(-0.1, 0.1);
  const auto oa0 = build_over_approximator(oracle, mid, bits("0"));
  const auto eb = compute_error_bounds(oracle, Simplex(mid), bits("0"), oa0, {bits("1")}, cfg);
  CHECK(eb.status == ErrorBoundStatus::DenominatorDegenerate);
  CHECK(std::isinf(eb.e_rel));
  // Interpolation gap of theta^2 on [-0.1, 0.1] peaks at 0.01.
  CHECK(eb.e_abs == doctest::Approx(0.01).epsilon(1e-5));
}

TEST_CASE("constrained split point") {
  const auto toy = make_toy1d_offset();
  MixedIntegerOracle oracle(toy.program);
  const Eigen::MatrixXd r = seg(0.0, 0.2);
  const auto oa = build_over_approximator(oracle, r, bits("1"));
  CHECK(constrained_split_point(oracle, bits("0"), oa, r)(0) == doctest::Approx(0.1).epsilon(1e-4));

  // Restricted to a facet of a triangle, the point stays on that facet.
  const auto toy2 = make_toy2d();
  MixedIntegerOracle o2(toy2.program);
  Eigen::MatrixXd tri(2, 3);
  tri << 0.0, 0.6, 0.0, 0.0, 0.0, 0.6;
  const auto oa2 = build_over_approximator(o2, tri, bits("100"));
  const Point th = constrained_split_point(o2, bits("100"), oa2, tri.rightCols(2));
  CHECK(std::abs(th(0) + th(1) - 0.6) <= 1e-7);
  CHECK(th.minCoeff() >= -1e-9);
}

TEST_CASE("snap triangulation") {
  Eigen::MatrixXd tri(2, 3);
  tri << 0, 1, 0, 0, 0, 1;
  const double vol = volume_of(tri);
  const auto barycenter = [&](const Eigen::MatrixXd& face) -> std::optional<std::pair<Point, Eigen::VectorXd>> {
    const int k = static_cast<int>(face.cols());
    return std::make_pair(Point(face.rowwise().mean()), Eigen::VectorXd::Constant(k, 1.0 / k));
  };
  const auto three = triangulate_snap_with(tri, barycenter, 10.0, 0.0);
  REQUIRE(three.size() == 3);
  double total = 0.0;
  for (const auto& c : three) {
    CHECK(condition_number(Simplex(c)) <= 10.0);
    total += volume_of(c);
  }
  CHECK(total == doctest::Approx(vol).epsilon(1e-9));

  // A split point 1e-6 from the facet opposite vertex 0.
  const auto near_facet = [&](const Eigen::MatrixXd& face) -> std::optional<std::pair<Point, Eigen::VectorXd>> {
    if (face.cols() == 3) {
      Eigen::VectorXd w(3);
      w << 1e-6, 0.5, 0.5 - 1e-6;
      return std::make_pair(Point(face * w), w);
    }
    return barycenter(face);
  };
  const auto snapped = triangulate_snap_with(tri, near_facet, 10.0, 0.0);
  REQUIRE(!snapped.empty());
  if (snapped.size() > 1) {
    total = 0.0;
    std::vector<Simplex> cells;
    for (const auto& c : snapped) {
      CHECK(condition_number(Simplex(c)) <= 10.0);
      total += volume_of(c);
      cells.emplace_back(c);
    }
    CHECK(total == doctest::Approx(vol).epsilon(1e-9));
    Rng rng(9);
    for (int t = 0; t < 2000; ++t) {
      const Point x = sample_simplex(tri, rng);
      int hits = 0;
      for (const auto& s : cells) hits += simplex_contains(s, x) ? 1 : 0;
      CHECK(hits >= 1);
    }
  }

  const auto segment = triangulate_snap_with(seg(0, 1), barycenter, 1.0, 0.0);
  REQUIRE(segment.size() == 2);
  for (const auto& c : segment) CHECK(volume_of(c) == doctest::Approx(0.5));

  // A split point inside the keep-out radius of a vertex is refused.
  const auto near_vertex = [&](const Eigen::MatrixXd& face) -> std::optional<std::pair<Point, Eigen::VectorXd>> {
    Eigen::VectorXd w = Eigen::VectorXd::Constant(face.cols(), 1e-3);
    w(1) = 1.0 - 1e-3 * static_cast<double>(face.cols() - 1);
    return std::make_pair(Point(face * w), w);
  };
  const auto refused = triangulate_snap_with(tri, near_vertex, 10.0, 0.25);
  REQUIRE(refused.size() == 1);
  CHECK(refused[0] == tri);
}

TEST_CASE("config validation") {
  Phase2Config cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.rho_max = 0.5;
  CHECK_THROWS_AS(cfg.validate(), InvalidInput);
  cfg = {};
  cfg.eps_abs = 0.0;
  cfg.eps_rel = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidInput);
  cfg = {};
  cfg.pi_rel = 0.5;
  CHECK_THROWS_AS(cfg.validate(), InvalidInput);
  cfg = {};
  cfg.pi_abs = -1.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidInput);
}

TEST_CASE("refinement of toy1d-offset") {
  const auto toy = make_toy1d_offset();
  for (double eps : {0.2, 0.05}) {
    MixedIntegerOracle oracle(toy.program);
    auto tree = phase1_tree(oracle, toy.theta);
    Phase2Config cfg;
    cfg.eps_abs = eps;
    const auto res = refine_partition(std::move(tree), oracle, cfg);
    REQUIRE(res.tree.refinement.has_value());
    CHECK(res.tree.refinement->eps_abs == eps);
    for (NodeId id : res.tree.leaves()) {
      const auto& n = res.tree.node(id);
      CHECK(is_closed_leaf(n.status));
      if (n.status == NodeStatus::CertifiedEpsSuboptimal) CHECK(n.e_abs <= eps + 1e-9);
    }
    if (eps == 0.05) {
      CHECK(res.reassignments >= 1);
      bool reassigned = false;
      for (const auto& e : res.events) reassigned |= e.action == "split_reassign";
      CHECK(reassigned);
    } else {
      for (NodeId id : res.tree.leaves())
        CHECK(res.tree.node(id).status != NodeStatus::WarnedIllConditioned);
    }
    VerifyOptions vo;
    vo.samples_per_leaf = 200;
    const auto report = verify_tree(res.tree, oracle, vo);
    for (const auto& c : report.checks) CHECK_MESSAGE(c.passed, c.name << " " << c.detail);

    std::ostringstream csv;
    write_certification_csv(csv, res.tree);
    CHECK(csv.str().rfind("leaf,status,e_abs,e_rel,rho,depth,volume\n", 0) == 0);
    CHECK(csv.str().find("summary,warned_volume_fraction,") != std::string::npos);
  }
}

TEST_CASE("tight condition bound closes cells with a warning") {
  const auto toy = make_toy2d();
  MixedIntegerOracle oracle(toy.program);
  auto tree = phase1_tree(oracle, toy.theta);
  Phase2Config cfg;
  cfg.eps_abs = 1e-4;
  cfg.rho_max = 1.0;
  const auto res = refine_partition(std::move(tree), oracle, cfg);
  int warned = 0;
  for (NodeId id : res.tree.leaves()) {
    const auto& n = res.tree.node(id);
    CHECK(is_closed_leaf(n.status));
    if (n.status == NodeStatus::WarnedIllConditioned) {
      ++warned;
      CHECK(std::isfinite(n.e_abs));
    }
  }
  CHECK(warned > 0);
  const auto stats = statistics(res.tree);
  CHECK(stats.warned_volume_fraction > 0.0);
}
