#include <gtest/gtest.h>

#include <cmath>

#include "paracr/ppwave.hpp"

using namespace paracr;

namespace {

PpWaveFamily fam(const char* r, const char* t) { return PpWaveFamily::make(parse_expr(r), parse_expr(t)); }

double at_s(const Expr& e, double s) { return evaluate(e, {{"s", s}}); }

}  // namespace

TEST(ZInvariants, Examples) {
  {
    const auto [Z1, Z2] = z_invariants(fam("s^2", "0"));
    EXPECT_TRUE(Z1.is_zero() || at_s(Z1, 0.2) == 0.0);
    EXPECT_TRUE(Z2.is_zero());
  }
  {
    const auto [Z1, Z2] = z_invariants(fam("s^3", "0"));
    for (double s : {-0.3, 0.0, 0.25}) EXPECT_DOUBLE_EQ(at_s(Z1, s), -3.0);
    EXPECT_TRUE(Z2.is_zero());
  }
  const auto [Z1, Z2] = z_invariants(fam("0", "0"));
  EXPECT_TRUE(Z1.is_zero());
  EXPECT_TRUE(Z2.is_zero());
}

TEST(ConformalFlatness, Residuals) {
  const auto [a, b] = conformal_flatness_residuals(fam("2 + 3*s", "1 - s/2"));
  EXPECT_TRUE(a.is_zero());
  EXPECT_TRUE(b.is_zero());
  const auto [c, d] = conformal_flatness_residuals(fam("s^3", "s"));
  EXPECT_DOUBLE_EQ(at_s(c, 0.0), 6.0);
  const double s = 0.2;
  EXPECT_NEAR(at_s(c, s), 6 + 3 * 6 * s * (6 * s) / (2 * (1 - 3 * s * s)), 1e-12);
  EXPECT_TRUE(d.is_zero());
}

TEST(PpWaveFamily, GuardRejects) {
  EXPECT_THROW(PpWaveFamily::make(parse_expr("s"), parse_expr("s")), std::invalid_argument);
  EXPECT_THROW(PpWaveFamily::make(parse_expr("s*x"), parse_expr("s")), std::invalid_argument);
  EXPECT_THROW(PpWaveFamily::make(parse_expr("s^3"), parse_expr("s"), {0.4, -0.4}), std::invalid_argument);
}

TEST(Gauge, TrivialFamilies) {
  for (const char* r : {"0", "s^2"}) {
    const auto f = fam(r, "0");
    const auto g = ricci_flat_gauge(f, 0, 0, 0, f.range, 1e-2);
    for (double h : g.h) EXPECT_EQ(h, 0.0);
    EXPECT_EQ(g.s.front(), -0.4);
    EXPECT_EQ(g.s.back(), 0.4);
  }
}

TEST(Gauge, BlowUpAndRange) {
  // h'' = h'^2 with h'(0) = 10 blows up at s = 0.1.
  const auto f = PpWaveFamily::make(Expr(0), Expr(0), {-0.4, 0.4});
  EXPECT_THROW(ricci_flat_gauge(f, 0, 0, 10, f.range, 1e-3), GaugeError);
  const auto g = ricci_flat_gauge(f, 0, 0, 1, {-0.2, 0.2}, 1e-3);
  EXPECT_THROW((void)g.at(0.3), GaugeError);
  // Exact solution h = -log(1 - s).
  for (double s : {-0.2, -0.0513, 0.1234, 0.2}) {
    const auto v = g.at(s);
    EXPECT_NEAR(v[0], -std::log(1 - s), 1e-11);
    EXPECT_NEAR(v[1], 1 / (1 - s), 1e-9);
    EXPECT_NEAR(v[2], 1 / ((1 - s) * (1 - s)), 1e-8);
  }
}

TEST(Gauge, FourthOrderConvergence) {
  const auto f = fam("s^3", "s");
  std::vector<double> end;
  for (double step : {0.04, 0.02, 0.01}) end.push_back(ricci_flat_gauge(f, 0, 0, 0.5, f.range, step).h.back());
  const double order = std::log2(std::abs(end[0] - end[1]) / std::abs(end[1] - end[2]));
  EXPECT_GE(order, 3.7);
}

TEST(PpWave, FlatFamily) {
  const auto r = verify_ppwave(fam("0", "0"), nullptr);
  EXPECT_TRUE(r.passed());
  for (const auto& [n, v] : r.values) {
    if (n == "ricci_max" || n == "weyl_max") EXPECT_EQ(v, 0.0);
  }
}

TEST(PpWave, CubicFamilyUngauged) {
  const auto f = fam("s^3", "s");
  const auto r = verify_ppwave(f, nullptr);
  for (const auto& c : r.checks) EXPECT_EQ(c.verdict, Verdict::Pass) << c.name << " " << c.residual;
  double ricci = 0, weyl = 0, fit = 0;
  for (const auto& [n, v] : r.values) {
    if (n == "ricci_max") ricci = v;
    if (n == "weyl_max") weyl = v;
    if (n == "weyl_fit_constant") fit = v;
  }
  EXPECT_GT(ricci, 1e-3);
  EXPECT_GT(weyl, 1e-3);
  EXPECT_NEAR(fit, -1.0, 1e-9);
}

TEST(PpWave, CubicFamilyRicciFlatGauge) {
  const auto f = fam("s^3", "s");
  const auto g = ricci_flat_gauge(f, 0, 0, 0, f.range, 1e-3);
  const auto r = verify_ppwave(f, &g);
  for (const auto& c : r.checks) EXPECT_EQ(c.verdict, Verdict::Pass) << c.name << " " << c.residual;
  ASSERT_NE(r.find("Ricci"), nullptr);
}

TEST(PpWave, BothZNonzero) {
  const auto f = fam("s^3", "s + s^2/2 + s^3/3");
  const auto g = ricci_flat_gauge(f, 0.1, 0.2, -0.3, f.range, 1e-3);
  const auto r = verify_ppwave(f, &g);
  EXPECT_TRUE(r.passed());
}

TEST(PpWave, LinearFamilyIsConformallyFlat) {
  const auto f = fam("0.5*s + 1", "0.3*s");
  const auto [Z1, Z2] = z_invariants(f);
  EXPECT_TRUE(Z1.is_zero());
  EXPECT_TRUE(Z2.is_zero());
  const auto r = verify_ppwave(f, nullptr);
  ASSERT_NE(r.find("Weyl vanishes with Z1, Z2"), nullptr);
  EXPECT_TRUE(r.passed());
}

TEST(PpWave, DxDyAnnihilateFamilyData) {
  const auto f = fam("s^3", "s");
  const auto pp = f.pair();
  const auto td = total_derivative_fields(pp);
  const auto [Z1, Z2] = z_invariants(f);
  const SampleDomain dom = jet_domain(pp, -0.4, 0.4);
  for (const Expr& e : {f.r, f.t, Z1, Z2}) {
    EXPECT_EQ(is_identically_zero(apply_total(td, 'x', e), dom).verdict, ZeroVerdict::Zero);
    EXPECT_EQ(is_identically_zero(apply_total(td, 'y', e), dom).verdict, ZeroVerdict::Zero);
  }
}

TEST(PpWave, GaugeIsRicciFlatWithDifferencedSecondDerivative) {
  // Same metric, but h'' taken from central differences of the interpolated
  // h' instead of the ODE, so Ricci-flatness is not built in.
  const auto f = fam("s^3", "s");
  const auto g = ricci_flat_gauge(f, 0, 0, 0, f.range, 1e-3);
  const Metric4 m = conformal_rescale(ppwave_metric(f), [g](const EvalPoint& pt) {
    const double s = pt.at("s"), e = 1e-5;
    const auto v = g.at(s);
    ScalarJet j;
    j.value = v[0];
    j.d[3] = v[1];
    j.dd[3][3] = (g.at(s + e)[1] - g.at(s - e)[1]) / (2 * e);
    return j;
  });
  const CurvatureReport c(m);
  double worst = 0;
  for (double s : {-0.35, -0.2, 0.0, 0.17, 0.33}) {
    worst = std::max(worst, max_abs(c.at({{"z", 0.1}, {"p", 0.2}, {"q", -0.3}, {"s", s}}).ricci));
  }
  EXPECT_LT(worst, 1e-6);
}
