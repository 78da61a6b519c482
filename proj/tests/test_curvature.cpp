#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "paracr/curvature.hpp"

using namespace paracr;

namespace {

const Chart& chart4() {
  static const Chart c({"a0", "a1", "a2", "a3"});
  return c;
}

Metric4 split_flat() {
  SymmetricTensor g(chart4());
  g.set(0, 3, Expr(1));
  g.set(1, 2, Expr(-1));
  return Metric4(g);
}

// 2 da0 da3 - 2 da1 da2 + H da3^2
Metric4 wave(const std::string& H) {
  SymmetricTensor g(chart4());
  g.set(0, 3, Expr(1));
  g.set(1, 2, Expr(-1));
  g.set(3, 3, parse_expr(H));
  return Metric4(g);
}

Metric4 diagonal_conformal(const Expr& phi) {
  SymmetricTensor g(chart4());
  g.set(0, 0, Expr(1));
  g.set(1, 1, Expr(1));
  g.set(2, 2, Expr(-1));
  g.set(3, 3, Expr(-1));
  return conformal_rescale(Metric4(g), phi);
}

std::vector<EvalPoint> points(int n, std::uint64_t seed = 7) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  std::vector<EvalPoint> pts;
  for (int k = 0; k < n; ++k) pts.push_back({{"a0", u(rng)}, {"a1", u(rng)}, {"a2", u(rng)}, {"a3", u(rng)}});
  return pts;
}

double max_diff(const std::array<double, 256>& a, const std::array<double, 256>& b) {
  double m = 0;
  for (std::size_t i = 0; i < 256; ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST(Curvature, SplitFlatIsExactlyFlat) {
  const CurvatureReport c(split_flat());
  ASSERT_TRUE(c.symbolic());
  for (const auto& e : c.expressions().riemann) EXPECT_TRUE(e.is_zero());
  EXPECT_TRUE(c.expressions().scalar.is_zero());
  EXPECT_EQ(signature(split_flat(), points(1)[0]), std::make_pair(2, 2));
}

TEST(Curvature, ConformallyFlatScalarOracle) {
  const Expr phi = parse_expr("0.3*a0*a1 + 0.2*a2^2 - 0.1*a3 + 0.05*a0^2*a3");
  const Metric4 g = diagonal_conformal(phi);
  const CurvatureReport c(g);
  ASSERT_TRUE(c.symbolic());
  const std::array<double, 4> eta = {1, 1, -1, -1};
  for (const auto& pt : points(5)) {
    const auto T = c.at(pt);
    // scal = -6 e^{-2 phi} (box phi + |d phi|^2) for e^{2 phi} eta in dimension 4
    double box = 0, grad = 0;
    for (std::size_t a = 0; a < 4; ++a) {
      const std::string n = chart4().name(a);
      const double da = evaluate(differentiate(phi, n), pt);
      box += eta[a] * evaluate(differentiate(differentiate(phi, n), n), pt);
      grad += eta[a] * da * da;
    }
    const double expected = -6.0 * std::exp(-2.0 * evaluate(phi, pt)) * (box + grad);
    EXPECT_NEAR(T.scalar, expected, 1e-10 * std::max(1.0, std::abs(expected)));
    EXPECT_LT(max_abs(T.weyl), 1e-10);
    EXPECT_LT(christoffel_fd_residual(c, pt), 1e-7);
  }
  EXPECT_TRUE(curvature_identity_checks(c, points(5)).passed());
}

TEST(Curvature, NumericPathMatchesSymbolic) {
  const Metric4 g = wave("a1^2*a2 + sin(a2)*a0 + a3*a1");
  const CurvatureReport sym(g);
  CurvatureOptions opt;
  opt.force_numeric = true;
  const CurvatureReport num(g, opt);
  ASSERT_TRUE(sym.symbolic());
  ASSERT_FALSE(num.symbolic());
  for (const auto& pt : points(5)) {
    const auto a = sym.at(pt);
    const auto b = num.at(pt);
    EXPECT_LT(max_diff(a.riemann, b.riemann), 1e-11);
    EXPECT_LT(max_diff(a.weyl_down, b.weyl_down), 1e-11);
    EXPECT_NEAR(a.weyl_square, b.weyl_square, 1e-11);
  }
  EXPECT_TRUE(curvature_identity_checks(num, points(5)).passed());
}

TEST(Curvature, BudgetFallsBackToNumeric) {
  const Metric4 g = wave("a1^2*a2 + a0*a1");
  CurvatureOptions opt;
  opt.node_budget = 20;
  const CurvatureReport c(g, opt);
  EXPECT_FALSE(c.symbolic());
  const CurvatureReport full(g);
  const auto pt = points(1)[0];
  EXPECT_LT(max_diff(c.at(pt).riemann, full.at(pt).riemann), 1e-12);
}

TEST(Curvature, NumericFactorMatchesSymbolicRescale) {
  const Metric4 g0 = wave("a1^2*a2 + a0*a1");
  const Expr phi = parse_expr("0.2*a0*a3 + 0.1*a1^2 - 0.3*a2");
  NumericFactor f = [phi](const EvalPoint& pt) {
    ScalarJet j;
    j.value = evaluate(phi, pt);
    for (std::size_t a = 0; a < 4; ++a) {
      const Expr da = differentiate(phi, chart4().name(a));
      j.d[a] = evaluate(da, pt);
      for (std::size_t b = 0; b < 4; ++b) j.dd[a][b] = evaluate(differentiate(da, chart4().name(b)), pt);
    }
    return j;
  };
  const CurvatureReport sym(conformal_rescale(g0, phi));
  const CurvatureReport num(conformal_rescale(g0, f));
  ASSERT_FALSE(num.symbolic());
  for (const auto& pt : points(4)) {
    const auto a = sym.at(pt);
    const auto b = num.at(pt);
    EXPECT_LT(max_diff(a.riemann_down, b.riemann_down), 1e-10);
    EXPECT_NEAR(a.scalar, b.scalar, 1e-10);
  }
}

TEST(Curvature, MixedWeylIsConformallyInvariant) {
  const Metric4 g0 = wave("a1^2*a2 + sin(a2)*a0");
  const Metric4 g1 = conformal_rescale(g0, parse_expr("0.4*a0*a1 - 0.2*a3^2 + 0.1*a2"));
  const CurvatureReport c0(g0), c1(g1);
  for (const auto& pt : points(4)) {
    const auto w0 = c0.at(pt).weyl;
    EXPECT_GT(max_abs(w0), 1e-3);
    EXPECT_LT(max_diff(w0, c1.at(pt).weyl), 1e-10);
  }
}

TEST(Curvature, SingularPointThrows) {
  SymmetricTensor g(chart4());
  g.set(0, 3, parse_expr("a0"));
  g.set(1, 2, Expr(-1));
  const CurvatureReport c{Metric4(g)};
  EXPECT_THROW((void)c.at({{"a0", 0.0}, {"a1", 0.1}, {"a2", 0.2}, {"a3", 0.3}}), EvalError);
}

TEST(Curvature, IdentitiesHoldOnWave) {
  const CurvatureReport c(wave("a1^2*a2 + sin(a2)*a0"));
  EXPECT_TRUE(curvature_identity_checks(c, points(3)).passed());
}
