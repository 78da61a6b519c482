#include "paracr/models.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace paracr {

namespace {

DiffForm d(const char* name) { return DiffForm::differential(flat_bundle_chart(), name); }
Expr e(const char* text) { return parse_expr(text); }

}  // namespace

const Chart& flat_bundle_chart() {
  static const Chart chart({"x", "y", "a0", "a1", "a2", "a3", "a", "f11", "f22", "f31", "f32"});
  return chart;
}

const std::array<const char*, 11>& FlatCoframe::names() {
  static const std::array<const char*, 11> n = {"theta1", "theta2", "theta3", "theta4", "Omega1", "Omega2",
                                                "Omega3", "Omega4", "Omega5", "Omega6", "A"};
  return n;
}

FlatCoframe flat_coframe() {
  const Chart& c = flat_bundle_chart();
  auto form = [&](std::vector<std::pair<std::string, const char*>> terms) {
    std::vector<std::pair<std::string, Expr>> t;
    for (auto& [n, text] : terms) t.emplace_back(n, parse_expr(text));
    return DiffForm::one_form(c, t);
  };
  // d log u is expanded by hand, e.g. d log(f11/f22) = df11/f11 - df22/f22,
  // so no sign condition on u is imposed.
  return FlatCoframe{{
      form({{"a0", "-a*f32/f22"},
            {"a2", "-y*a*f32/f22"},
            {"a1", "(f11*f22 - x*a*f32)/f22"},
            {"a3", "y*(f11*f22 - x*a*f32)/f22"}}),
      form({{"a0", "-a*f31/f11"},
            {"a1", "-x*a*f31/f11"},
            {"a2", "(f11*f22 - y*a*f31)/f11"},
            {"a3", "x*(f11*f22 - y*a*f31)/f11"}}),
      form({{"a0", "-a*f31*f32/(f11*f22)"},
            {"a1", "f31*(f11*f22 - x*a*f32)/(f11*f22)"},
            {"a2", "f32*(f11*f22 - y*a*f31)/(f11*f22)"},
            {"a3", "-(f11*f22 - x*a*f32)*(f11*f22 - y*a*f31)/(a*f11*f22)"}}),
      form({{"a0", "a"}, {"a1", "x*a"}, {"a2", "y*a"}, {"a3", "x*y*a"}}),
      form({{"f11", "1/(2*f11)"}, {"f22", "-1/(2*f22)"}, {"y", "a*f31/(f11*f22)"}, {"x", "-a*f32/(f11*f22)"}}),
      form({{"x", "a/f11"}}),
      form({{"y", "a/f22"}}),
      form({{"a", "f31/(a*f11)"},
            {"f31", "1/f11"},
            {"f11", "-f31/f11^2"},
            {"f22", "-f31/(f11*f22)"},
            {"y", "a*f31^2/(f11^2*f22)"}}),
      form({{"a", "f32/(a*f22)"},
            {"f32", "1/f22"},
            {"f11", "-f32/(f11*f22)"},
            {"f22", "-f32/f22^2"},
            {"x", "a*f32^2/(f11*f22^2)"}}),
      form({{"f11", "1/(2*f11)"}, {"f22", "1/(2*f22)"}, {"a", "-1/a"}, {"y", "-a*f31/(f11*f22)"},
            {"x", "-a*f32/(f11*f22)"}}),
      form({{"f11", "-1/f11"}, {"f22", "-1/f22"}}),
  }};
}

SampleDomain flat_bundle_domain(int samples, std::uint64_t seed, double guard_floor) {
  SampleDomain dom;
  for (const auto& n : flat_bundle_chart().names()) dom.set(n, -2, 2);
  dom.samples = samples;
  dom.seed = seed;
  dom.guard_floor = guard_floor;
  dom.derived_floor = 1e-4;
  dom.guard(var("a")).guard(var("f11")).guard(var("f22"));
  return dom;
}

Report verify_structure_equations(const FlatCoframe& c, const SampleDomain& dom) {
  const Expr half(Rational(1, 2));
  const auto& O = [&](int i) -> const DiffForm& { return c.omega(i); };
  const auto& th = [&](int i) -> const DiffForm& { return c.theta(i); };
  const DiffForm hA = half * c.A();
  const std::vector<std::pair<std::string, DiffForm>> rhs = {
      {"d theta1", wedge(O(1) - hA, th(1)) - wedge(O(3), th(3)) - wedge(O(5), th(4))},
      {"d theta2", wedge(-O(1) - hA, th(2)) - wedge(O(2), th(3)) - wedge(O(4), th(4))},
      {"d theta3", wedge(O(4), th(1)) + wedge(O(5), th(2)) + wedge(O(6) - hA, th(3))},
      {"d theta4", wedge(O(2), th(1)) + wedge(O(3), th(2)) + wedge(-O(6) - hA, th(4))},
      {"d Omega1", wedge(O(2), O(5)) - wedge(O(3), O(4))},
      {"d Omega2", wedge(O(2), O(1) + O(6))},
      {"d Omega3", wedge(O(1) - O(6), O(3))},
      {"d Omega4", wedge(O(4), O(1) - O(6))},
      {"d Omega5", wedge(O(1) + O(6), O(5))},
      {"d Omega6", wedge(O(2), O(5)) + wedge(O(3), O(4))},
      {"d A", DiffForm(flat_bundle_chart(), 2)},
  };
  Report r;
  r.title = "flat structure equations";
  for (std::size_t k = 0; k < rhs.size(); ++k) {
    const DiffForm res = exterior_derivative(c.forms[k < 10 ? k : 10]) - rhs[k].second;
    r.add(zero_check(rhs[k].first, all_identically_zero(res.coefficients(), dom)));
  }
  return r;
}

SymmetricTensor flat_metric_defect(const FlatCoframe& c) {
  const Chart& ch = flat_bundle_chart();
  const Expr two(2);
  const Expr f = e("2*f11*f22");
  return sym_sum(ch, {{two, c.theta(1), c.theta(2)},
                      {two, c.theta(3), c.theta(4)},
                      {f, d("a0"), d("a3")},
                      {-f, d("a1"), d("a2")}});
}

Tangency newman_tangency(const std::array<double, 4>& /*a*/, const std::array<double, 4>& da, double tol) {
  const double n2 = da[0] * da[0] + da[1] * da[1] + da[2] * da[2] + da[3] * da[3];
  Tangency t;
  if (n2 == 0.0) {
    t.tangent = true;
    return t;
  }
  if (da[3] != 0.0) {
    const double x = -da[2] / da[3];
    const double y = -da[1] / da[3];
    // da0 + da1 x + da2 y + da3 x y = (da0 da3 - da1 da2) / da3
    const double contact = da[0] + da[1] * x + da[2] * y + da[3] * x * y;
    t.margin = std::abs(contact * da[3]) / n2;
    t.tangent = t.margin < tol;
    if (t.tangent) t.point = std::make_pair(x, y);
    return t;
  }
  // da3 = 0: the tangency equations force da1 = da2 = 0, then da0 = 0.
  const double n = std::sqrt(n2);
  t.margin = std::max({std::abs(da[0]), std::abs(da[1]), std::abs(da[2])}) / n;
  t.tangent = false;
  return t;
}

SiFamily si_family(const Expr& kappa) {
  const Substitution k = {{"k", kappa}};
  const PdePair pair = PdePair::make(substitute(e("-2*y*p*s/(z + x*p - y*q)"), k),
                         substitute(e("-(2*k/y)*s/(z + x*p - y*q) - (2*x/y)*(z - y*q)*s/(z + x*p - y*q)"), k));
  const Expr psi = substitute(e("(k*(a0*a1 + a2*a3)*y + k*a1 - y - a0*y^2 - a3*x*y)/(a2*y - a1*x)"), k);
  const Chart chart({"a0", "a1", "a2", "a3"});
  const Expr conf = substitute(e("2/(1 + k*(a0*a1 + a2*a3))^2"), k);
  SymmetricTensor g(chart);
  g.set(0, 1, Expr(Rational(1, 2)) * conf);
  g.set(2, 3, Expr(Rational(1, 2)) * conf);
  return SiFamily{pair, psi, Metric4(g), kappa};
}

SiFamily si_family(double kappa) {
  std::ostringstream os;
  os << std::setprecision(17) << std::abs(kappa);
  const Expr k(Rational::from_decimal(os.str()));
  return si_family(kappa < 0 ? -k : k);
}

SampleDomain si_jet_domain(const PdePair& pp, int samples, std::uint64_t seed) {
  SampleDomain dom = jet_domain(pp, 0.3, 1.2, samples, seed);
  dom.set("x", -0.5, 0.5).set("q", -0.5, 0.5);
  dom.guard(e("z + x*p - y*q"));
  return dom;
}

SampleDomain si_solution_domain(int samples, std::uint64_t seed) {
  SampleDomain dom;
  dom.set("x", -0.5, 0.5).set("y", 0.5, 1.5);
  for (const char* a : {"a0", "a1", "a2", "a3"}) dom.set(a, -1, 1);
  dom.samples = samples;
  dom.seed = seed;
  dom.guard(e("a2*y - a1*x"));
  return dom;
}

SampleDomain si_metric_domain(const SiFamily& f, int samples, std::uint64_t seed) {
  SampleDomain dom;
  for (const char* a : {"a0", "a1", "a2", "a3"}) dom.set(a, -0.4, 0.4);
  dom.samples = samples;
  dom.seed = seed;
  dom.guard(Expr(1) + f.kappa * e("a0*a1 + a2*a3"));
  return dom;
}

}  // namespace paracr
