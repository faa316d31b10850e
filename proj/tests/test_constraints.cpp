#include "cgp/constraints.hpp"
#include "cgp/property_suite.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace cgp;

TEST_CASE("encoding sizes and rows") {
  const Partition p = uniform_partition(50);
  const LinearInequalitySystem b = encode(ConstraintSpec::bounds(-25, 20), p);
  CHECK(b.rows() == 51);
  CHECK(b.lower.minCoeff() == -25);
  CHECK(b.upper.maxCoeff() == 20);

  const Partition q = uniform_partition(2);
  const LinearInequalitySystem m = encode(ConstraintSpec::non_decreasing(), q);
  CHECK(m.rows() == 2);
  const Matrix md = Matrix(m.matrix);
  CHECK(md.row(0) == (Eigen::RowVector3d() << -1, 1, 0).finished());

  const LinearInequalitySystem c = encode(ConstraintSpec::convex(), q);
  REQUIRE(c.rows() == 1);
  const Eigen::RowVector3d row = Matrix(c.matrix).row(0);
  CHECK(row(0) > 0);
  CHECK(row(1) == doctest::Approx(-2 * row(0)));
  CHECK(row(2) == doctest::Approx(row(0)));
  CHECK(c.lower(0) == 0);
  CHECK(std::isinf(c.upper(0)));

  CHECK(encode(ConstraintSpec::none(), p).rows() == 0);
  CHECK(encode(ConstraintSet{}, p).rows() == 0);
  CHECK(encode(ConstraintSpec{ConstraintFamily::Bounds, -kInf, kInf}, p).rows() == 0);
  CHECK(encode(ConstraintSet{ConstraintSpec::bounds(0, 1), ConstraintSpec::non_decreasing()}, p).rows() == 101);
}

TEST_CASE("convex rows on a non-uniform partition are slope differences") {
  const Partition p({0.0, 0.1, 0.4, 1.0});
  const LinearInequalitySystem c = encode(ConstraintSpec::convex(), p);
  Vector v(4);
  for (Index j = 0; j < 4; ++j) v(j) = std::pow(p.knot(j), 2);
  const Vector g = c.matrix * v;
  CHECK(g(0) == doctest::Approx(0.5 - 0.1));
  CHECK(g(1) == doctest::Approx(1.4 - 0.5));
}

TEST_CASE("bounds validation") {
  CHECK_THROWS_AS(ConstraintSpec::bounds(1, 1), Error);
  CHECK_THROWS_AS(ConstraintSpec::bounds(2, 1), Error);
  CHECK_THROWS_AS(ConstraintSpec::bounds(std::nan(""), 1), Error);
  CHECK_NOTHROW(ConstraintSpec::bounds(-kInf, 0));
}

TEST_CASE("feasibility examples") {
  const Partition p = uniform_partition(4);
  const LinearInequalitySystem b = encode(ConstraintSpec::bounds(0, 1), p);
  CHECK(is_feasible(b, Vector::Constant(5, 0.5)));
  CHECK(is_feasible(b, Vector::Zero(5)));
  Vector v = Vector::Constant(5, 0.5);
  v(2) = 1.1;
  CHECK_FALSE(is_feasible(b, v));
  CHECK(b.max_violation(v) == doctest::Approx(0.1));
  CHECK(is_feasible(b, v, 0.2));
  CHECK_THROWS_AS(is_feasible(b, v, -1.0), Error);
  CHECK_THROWS_AS(b.max_violation(Vector::Zero(3)), Error);

  const LinearInequalitySystem m = encode(ConstraintSpec::non_decreasing(), p);
  CHECK(is_feasible(m, Vector::LinSpaced(5, 0, 1)));
  CHECK_FALSE(is_feasible(m, Vector::LinSpaced(5, 1, 0)));
}

TEST_CASE("concatenate stacks rows") {
  const Partition p = uniform_partition(3);
  const LinearInequalitySystem a = encode(ConstraintSpec::bounds(0, 1), p);
  const LinearInequalitySystem b = encode(ConstraintSpec::convex(), p);
  const LinearInequalitySystem s = concatenate(a, b);
  CHECK(s.rows() == a.rows() + b.rows());
  CHECK(Matrix(s.matrix).topRows(a.rows()) == Matrix(a.matrix));
  CHECK(Matrix(s.matrix).bottomRows(b.rows()) == Matrix(b.matrix));
  CHECK_THROWS_AS(concatenate(a, encode(ConstraintSpec::convex(), uniform_partition(5))), Error);
}

TEST_CASE("projection of family members stays in the family") {
  const auto ladder = std::vector<Partition>{uniform_partition(4), uniform_partition(16), uniform_partition(64)};
  const auto sq = [](double x) { return x * x; };
  const auto sine = [](double x) { return std::sin(std::numbers::pi * x); };
  CHECK(check_h2(ConstraintSpec::convex(), {sq}, ladder).ok());
  CHECK(check_h2(ConstraintSpec::non_decreasing(), {sq}, ladder).ok());
  CHECK(check_h2(ConstraintSpec::bounds(0, 1), {sine}, ladder).ok());
  const H2Report bad = check_h2(ConstraintSpec::non_decreasing(), {sine}, ladder);
  CHECK_FALSE(bad.ok());
  CHECK(bad.levels_checked == 3);
  CHECK(bad.functions_checked == 1);
  CHECK(bad.violations.size() == 3);
}

TEST_CASE("random family members: knot feasibility iff interpolant membership") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::vector<double> grid = uniform_grid(2001);
  for (const ConstraintSpec& spec :
       {ConstraintSpec::bounds(-1, 2), ConstraintSpec::non_decreasing(), ConstraintSpec::convex()}) {
    const auto members = analytic_family_members(spec, 20, 22);
    const Partition p = refine(uniform_partition(8), std::vector<double>{0.37, 0.61});
    const LinearInequalitySystem sys = encode(spec, p);
    for (const auto& f : members) {
      const CoefVector c = project(f, p);
      CHECK(is_feasible(sys, c, 1e-12));
      CHECK(spec.holds_on_grid([&](double x) { return evaluate_pl(c, x); }, grid, 1e-9));
    }
    // random knot vectors, half of them built to satisfy the family
    for (int t = 0; t < 200; ++t) {
      Vector v(p.size());
      for (Index j = 0; j < v.size(); ++j) v(j) = 4 * unit(rng) - 1.5;
      if (t % 2 == 0) {
        if (spec.family == ConstraintFamily::Bounds) v = (v.array() + 1.5) * 0.75 - 1.0;
        std::sort(v.data(), v.data() + v.size());
        if (spec.family == ConstraintFamily::Convex) {
          Vector c(v.size());
          c(0) = 0.0;
          for (Index j = 1; j < v.size(); ++j) c(j) = c(j - 1) + v(j) * (p.knot(j) - p.knot(j - 1));
          v = c;
        }
      }
      const bool knots_ok = is_feasible(sys, v, 0.0);
      // the knots are added to the evaluation grid so every kink is seen
      std::vector<double> pts(grid);
      pts.insert(pts.end(), p.knots().begin(), p.knots().end());
      std::sort(pts.begin(), pts.end());
      pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
      const bool curve_ok = spec.holds_on_grid([&](double x) { return evaluate_pl(p, v, x); }, pts, 1e-9);
      CHECK(knots_ok == curve_ok);
    }
  }
}
