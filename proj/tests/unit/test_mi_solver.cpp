#include <doctest.h>

#include <random>
#include <set>

#include "commutree/enumeration.hpp"
#include "commutree/errors.hpp"
#include "commutree/instance_gen.hpp"
#include "commutree/mi_solver.hpp"
#include "commutree/verify.hpp"

using namespace commutree;

namespace {

Point pt(double v) { return Point::Constant(1, v); }

Eigen::MatrixXd seg(double a, double b) {
  Eigen::MatrixXd v(1, 2);
  v << a, b;
  return v;
}

Commutation bits(const char* s) { return Commutation::from_string(s); }

}  // namespace

TEST_CASE("enumeration respects one-hot groups") {
  const auto prog = ParametricProgram::from_map(
      "grouped", 1, 1, 5, [](const Commutation&) { return make_toy1d().program.instantiate(bits("0")); },
      {OneHotGroup{{0, 1, 2}}});
  CommutationEnumerator en(prog);
  CHECK(en.count() == 12);
  std::set<Commutation> seen;
  while (auto d = en.next()) {
    CHECK((*d)[0] + (*d)[1] + (*d)[2] == 1);
    seen.insert(*d);
  }
  CHECK(seen.size() == 12);
  en.reset();
  CHECK(en.next().has_value());

  const auto all = admissible_commutations(make_toy2d().program);
  CHECK(all.size() == 3);
}

TEST_CASE("solve_minlp on toys") {
  const auto offset = make_toy1d_offset();
  const auto a = solve_minlp(offset.program, pt(0.1));
  REQUIRE(a.status == MinlpStatus::Optimal);
  CHECK(a.value() == doctest::Approx(0.01).epsilon(1e-6));
  CHECK(a.delta == bits("0"));

  const auto toy = make_toy1d();
  const auto b = solve_minlp(toy.program, pt(0.9));
  REQUIRE(b.status == MinlpStatus::Optimal);
  CHECK(b.value() == doctest::Approx(0.81).epsilon(1e-6));
  CHECK(b.delta == bits("0"));

  CHECK(solve_minlp(toy.program, pt(2.0)).status == MinlpStatus::Infeasible);
}

TEST_CASE("common feasible commutation") {
  const auto toy = make_toy1d();
  const auto a = find_common_feasible_commutation(toy.program, seg(-1, 0));
  REQUIRE(a.status == MinlpStatus::Optimal);
  CHECK(a.delta == bits("1"));
  CHECK(a.vertex_outcomes.size() == 2);

  CHECK(find_common_feasible_commutation(toy.program, seg(-1, 1)).status == MinlpStatus::Infeasible);

  const auto c = find_common_feasible_commutation(toy.program, seg(0, 0.1), bits("1"));
  REQUIRE(c.status == MinlpStatus::Optimal);
  CHECK(c.delta == bits("0"));
}

TEST_CASE("branch and bound matches enumeration on the affine encoding") {
  const auto toy = make_toy1d_offset();
  MinlpOptions bnb;
  bnb.backend = MinlpBackend::BranchAndBound;
  MinlpOptions en;
  en.backend = MinlpBackend::Enumeration;
  for (double th : {-0.9, -0.15, 0.0, 0.1, 0.19, 0.7}) {
    const auto x = solve_minlp(toy.program, pt(th), bnb);
    const auto y = solve_minlp(toy.program, pt(th), en);
    REQUIRE(x.status == MinlpStatus::Optimal);
    REQUIRE(y.status == MinlpStatus::Optimal);
    CHECK(x.value() == doctest::Approx(y.value()).epsilon(1e-6));
    CHECK(x.delta == y.delta);
  }
  CHECK(solve_minlp(toy.program, pt(1.5), bnb).status == MinlpStatus::Infeasible);
  const auto common = find_common_feasible_commutation(toy.program, seg(0.3, 0.9), {}, bnb);
  REQUIRE(common.status == MinlpStatus::Optimal);
  CHECK(common.delta == bits("0"));
}

TEST_CASE("enumeration budget reports exhaustion") {
  MinlpOptions tiny;
  tiny.backend = MinlpBackend::Enumeration;
  tiny.enumeration_budget = 1;
  const auto toy = make_toy1d();
  // A full minimum needs both candidates.
  MixedIntegerOracle oracle(toy.program, tiny);
  const auto r = oracle.solve_minlp(pt(-0.9));
  CHECK(r.status == MinlpStatus::Exhausted);
}

TEST_CASE("minlp value is the minimum over commutations") {
  const auto toy = make_toy2d();
  MixedIntegerOracle oracle(toy.program);
  Rng rng(4);
  for (int t = 0; t < 40; ++t) {
    const Point th = sample_simplex(toy.theta.vertices().leftCols(3), rng);
    const auto best = oracle.solve_minlp(th);
    if (best.status != MinlpStatus::Optimal) continue;
    for (const auto& d : admissible_commutations(toy.program)) {
      const auto r = oracle.solve_fixed(th, d);
      if (r.optimal()) CHECK(best.value() <= r.value + 1e-7);
    }
  }
}

TEST_CASE("common commutation holds on sampled interiors") {
  const auto toy = make_toy2d();
  MixedIntegerOracle oracle(toy.program);
  Rng rng(8);
  Eigen::MatrixXd tri(2, 3);
  tri << -0.1, 0.05, -0.1, -0.1, -0.1, 0.05;
  const auto r = oracle.find_common_feasible(tri);
  REQUIRE(r.status == MinlpStatus::Optimal);
  for (int t = 0; t < 100; ++t) CHECK(oracle.solve_fixed(sample_simplex(tri, rng), r.delta).optimal());

  // Every commutation infeasible at some vertex is rejected.
  Eigen::MatrixXd wide(2, 3);
  wide << -1, 1, -1, -1, -1, 1;
  const auto w = oracle.find_common_feasible(wide);
  if (w.status == MinlpStatus::Optimal) {
    for (int j = 0; j < 3; ++j) CHECK(oracle.solve_fixed(wide.col(j), w.delta).optimal());
  }
}

TEST_CASE("cache soundness") {
  const auto toy = make_toy1d();
  MixedIntegerOracle oracle(toy.program);
  for (double th : {-0.8, -0.1, 0.1, 0.6}) oracle.solve_minlp(pt(th));
  CHECK(oracle.cache().size() >= 1);
  for (const auto& e : oracle.cache().entries()) {
    CHECK(solve_fixed_commutation(toy.program, e.witness, e.delta).optimal());
  }
}

TEST_CASE("inadmissible commutations are rejected") {
  const auto toy = make_toy2d();
  CHECK_FALSE(toy.program.admissible(bits("110")));
  CHECK_THROWS_AS(toy.program.instantiate(bits("110")), InadmissibleCommutation);
  CHECK_THROWS_AS(toy.program.instantiate(bits("10")), InadmissibleCommutation);
}
