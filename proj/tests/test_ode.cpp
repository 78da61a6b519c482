#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "paracr/ode.hpp"
#include "support.hpp"

using namespace paracr;
using paracr::testing::jk_oracle;

namespace {
// x p - y >= 0.05 here.
SampleDomain linear_datum_domain() {
  SampleDomain dom = ode_domain(0.5, 2.0);
  dom.set("x", 1.0, 2.0).set("y", 0.1, 0.5);
  return dom;
}
}  // namespace

TEST(InvariantI, LinearDatumGeneric) {
  const auto d = ParaCrDatum112::make(parse_expr("x*a1 + y*a2"));
  const auto dom = linear_datum_domain();
  const auto r = invariant_I(d, dom);
  EXPECT_EQ(zero_check("", is_identically_zero(r.I - parse_expr("x*(x*a1 + y*a2) - y"), dom)).verdict, Verdict::Pass);
  EXPECT_EQ(r.branch, Branch::Generic);
}

TEST(InvariantI, Degenerate) {
  const auto dom = ode_domain(0.5, 2.0);
  EXPECT_EQ(invariant_I(ParaCrDatum112::make(parse_expr("x*a1")), dom).branch, Branch::Degenerate);
  const auto r = invariant_I(ParaCrDatum112::make(parse_expr("a1")), dom);
  EXPECT_TRUE(r.I.is_zero());
  EXPECT_EQ(r.branch, Branch::Degenerate);
}

TEST(InvariantI, MixedWhenISignChanges) {
  // I = x p - y changes sign on [-1, 1]^4.
  const auto r = invariant_I(ParaCrDatum112::make(parse_expr("x*a1 + y*a2")), ode_domain(-1, 1, 200));
  EXPECT_EQ(r.branch, Branch::Mixed);
}

TEST(InvariantI, BranchSurvivesRescaleOfA2) {
  const auto dom = linear_datum_domain();
  for (const char* p : {"x*a1 + y*a2", "x*a1", "a1 + x*a2^2"}) {
    const Expr e = parse_expr(p);
    const auto a = invariant_I(ParaCrDatum112::make(e), dom);
    const auto b = invariant_I(ParaCrDatum112::make(substitute(e, {{"a2", parse_expr("2*a2")}})), dom);
    EXPECT_EQ(a.branch, b.branch) << p;
  }
}

TEST(ParaCrDatum, RejectsMissingA1) {
  EXPECT_THROW(ParaCrDatum112::make(parse_expr("x*a2")), std::invalid_argument);
  EXPECT_THROW(ParaCrDatum111::make(parse_expr("x + y")), std::invalid_argument);
  EXPECT_THROW(ParaCrDatum112::make(parse_expr("a1*w")), std::invalid_argument);
}

TEST(Reduction, LinearDatumWorkedPoint) {
  const auto d = ParaCrDatum112::make(parse_expr("x*a1 + y*a2"));
  const auto r = reduce_to_third_order(d, {1, 2, 5, 7}, 0.0);
  EXPECT_NEAR(r.F, 14.0 / 3.0, 1e-12);
}

TEST(Reduction, LinearDatumMatchesClosedForm) {
  const auto sys = third_order_system(ParaCrDatum112::make(parse_expr("x*a1 + y*a2")));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  for (int k = 0; k < 20; ++k) {
    const JetPoint3 pt{u(rng), u(rng), 3 * u(rng), u(rng)};
    if (std::abs(pt.y1 * pt.x - pt.y) < 0.1) continue;
    const double expected = pt.y2 * (pt.y2 * pt.x - pt.y1) / (pt.y1 * pt.x - pt.y);
    const auto r = reduce_to_third_order(sys, pt, 0.5);
    EXPECT_NEAR(r.F, expected, 1e-9 * std::max(1.0, std::abs(expected)));
    // The solved pair is locally unique, so a nearby seed lands on the same F.
    EXPECT_LT(std::abs(reduce_to_third_order(sys, pt, 0.6).F - r.F), 1e-7);
  }
}

TEST(Reduction, NonlinearDatumMatchesTaylorOfSolution) {
  // y' = a1 exp(a2 x) + y a2 along y = psi(x); check F against psi''' by
  // evaluating the solution family numerically.
  const auto d = ParaCrDatum112::make(parse_expr("a1*(1 + a1^2/10) + x*a2"));
  const auto sys = third_order_system(d);
  const auto r = reduce_to_third_order(sys, {0.3, 0.1, 1.2, 0.7}, 0.0);
  const EvalPoint at = {{"x", 0.3}, {"y", 0.1}, {"a1", r.a1}, {"a2", r.a2}};
  EXPECT_NEAR(evaluate(sys.p, at), 1.2, 1e-12);
  EXPECT_NEAR(evaluate(sys.q, at), 0.7, 1e-12);
  EXPECT_NEAR(r.F, evaluate(sys.F, at), 1e-14);
}

TEST(Reduction, QuadraticFamilyHasZeroF) {
  const auto sys = third_order_system(ParaCrDatum112::make(parse_expr("a1 + x*a2")));
  for (const JetPoint3 pt : {JetPoint3{0, 0, 1, 2}, JetPoint3{1.5, -2, 0.3, -4}}) {
    EXPECT_EQ(reduce_to_third_order(sys, pt, 1.0).F, 0.0);
  }
}

TEST(Reduction, DegenerateDatumThrows) {
  const auto d = ParaCrDatum112::make(parse_expr("x*a1"));
  EXPECT_THROW(reduce_to_third_order(d, {1, 2, 5, 7}, 0.0), ReductionError);
}

TEST(Reduction, CubicTaylorStepIsFourthOrder) {
  const Expr psi = parse_expr("a0*exp(a2*x) - (a1/a2)*x - a1/a2^2");
  const EvalPoint a = {{"a0", 0.7}, {"a1", 0.4}, {"a2", 1.3}};
  auto jet = [&](double x) {
    EvalPoint pt = a;
    pt["x"] = x;
    const Expr d1 = differentiate(psi, "x"), d2 = differentiate(d1, "x");
    return std::array<double, 3>{evaluate(psi, pt), evaluate(d1, pt), evaluate(d2, pt)};
  };
  const auto sys = third_order_system(ParaCrDatum112::make(parse_expr("x*a1 + y*a2")));
  const double x0 = 0.8;
  const auto j0 = jet(x0);
  const double F = reduce_to_third_order(sys, {x0, j0[0], j0[1], j0[2]}, 0.0).F;
  auto err = [&](double h) {
    return std::abs(jet(x0 + h)[0] - (j0[0] + j0[1] * h + j0[2] * h * h / 2 + F * h * h * h / 6));
  };
  const double ratio = err(0.02) / err(0.01);
  EXPECT_GT(ratio, 14.0);
  EXPECT_LT(ratio, 18.0);
}

TEST(SafeguardedNewton, BisectsWhenNewtonOvershoots) {
  // atan has Newton steps that diverge from |x0| > 1.39.
  int it = 0;
  const double r = safeguarded_newton(
      [](double x) { return std::make_pair(std::atan(x), 1.0 / (1.0 + x * x)); }, 3.0, {-10, 10}, 1e-12, 200, &it);
  EXPECT_NEAR(r, 0.0, 1e-12);
}

TEST(SolutionOde, LinearDatumGeneralSolution) {
  const Expr F = parse_expr("y2*(y2*x - y1)/(y1*x - y)");
  const Expr psi = parse_expr("a0*exp(a2*x) - (a1/a2)*x - a1/a2^2");
  SampleDomain dom;
  dom.set("x", -1, 1).set("a0", 0.5, 2).set("a1", 0.5, 2).set("a2", 0.5, 2);
  dom.samples = 50;
  const auto r = check_solution_ode(F, psi, dom);
  EXPECT_TRUE(r.passed()) << r.checks[0].residual;
}

TEST(SolutionOde, QuadraticAndQuartic) {
  SampleDomain dom;
  dom.set("x", -1, 1).set("a0", -1, 1).set("a1", -1, 1).set("a2", -1, 1);
  EXPECT_TRUE(check_solution_ode(Expr(0), parse_expr("a0 + a1*x + a2*x^2"), dom).passed());
  const auto r = check_solution_ode(Expr(0), parse_expr("x^4"), dom);
  ASSERT_EQ(r.checks[0].verdict, Verdict::Fail);
  ASSERT_TRUE(r.checks[0].witness);
  EXPECT_NEAR(r.checks[0].residual, 24 * std::abs(r.checks[0].witness->at("x")), 1e-12);
}

TEST(SecondOrder, FlatFamiliesVanish) {
  SampleDomain dom;
  // a1 - x >= 1 keeps the fifth-order partials of the rational data O(1).
  dom.set("x", -0.5, 0.5).set("y", -0.5, 0.5).set("a1", 1.5, 2.5);
  for (const char* p : {"a1", "1/(a1 - x)", "y/(x - a1)", "exp(y - a1)", "(a1 + y)/(x + 1)"}) {
    const auto [J, K] = second_order_invariants(ParaCrDatum111::make(parse_expr(p)));
    EXPECT_EQ(is_identically_zero(J, dom).verdict, ZeroVerdict::Zero) << p;
    EXPECT_EQ(is_identically_zero(K, dom).verdict, ZeroVerdict::Zero) << p;
  }
  const auto [J, K] = second_order_invariants(ParaCrDatum111::make(parse_expr("a1")));
  EXPECT_TRUE(J.is_zero());
  EXPECT_TRUE(K.is_zero());
}

TEST(SecondOrder, GenericDatumIsNonzero) {
  SampleDomain dom;
  dom.set("x", -0.5, 0.5).set("y", -0.5, 0.5).set("a1", 1.0, 2.0);
  const auto [J, K] = second_order_invariants(ParaCrDatum111::make(parse_expr("a1*x + y*a1^2")));
  EXPECT_EQ(is_identically_zero(J, dom).verdict, ZeroVerdict::Nonzero);
  EXPECT_EQ(is_identically_zero(K, dom).verdict, ZeroVerdict::Nonzero);
}

TEST(SecondOrder, DoubleTranscription) {
  const Expr P = parse_expr("a1^3*x/3 + y^2*a1^2 - x*y*a1 + x^3*y*a1^4/5 + a1*y^3");
  const auto [J, K] = second_order_invariants(ParaCrDatum111::make(P));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k = 0; k < 10; ++k) {
    const EvalPoint pt = {{"x", u(rng)}, {"y", u(rng)}, {"a1", u(rng)}};
    const auto [j, kk] = jk_oracle(P, pt);
    EXPECT_NEAR(evaluate(J, pt), j, 1e-9 * std::max(1.0, std::abs(j)));
    EXPECT_NEAR(evaluate(K, pt), kk, 1e-9 * std::max(1.0, std::abs(kk)));
  }
}
