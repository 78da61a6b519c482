#include "paracr/metric.hpp"

#include <cmath>
#include <tuple>

namespace paracr {

namespace {

const std::array<const char*, 6> kJet = {"x", "y", "z", "p", "q", "s"};

// Resolves names such as "Rs", "DxTq", "DyDyRs", "DxDyRs" to expressions:
// a chain of total derivatives applied (right to left) to a partial
// derivative of R or T.
Expr resolve_symbol(const std::string& name, const PdePair& pp, const TotalDerivatives& td) {
  std::string rest = name;
  std::vector<char> ops;
  while (rest.size() > 2 && rest[0] == 'D' && (rest[1] == 'x' || rest[1] == 'y')) {
    ops.push_back(rest[1]);
    rest = rest.substr(2);
  }
  if (rest.empty() || (rest[0] != 'R' && rest[0] != 'T')) throw std::logic_error("bad formula symbol " + name);
  Expr e = rest[0] == 'R' ? pp.R : pp.T;
  for (std::size_t i = 1; i < rest.size(); ++i) e = differentiate(e, std::string(1, rest[i]));
  for (auto it = ops.rbegin(); it != ops.rend(); ++it) e = apply_total(td, *it, e);
  return e;
}

Expr formula(std::string_view text, const PdePair& pp, const TotalDerivatives& td) {
  const Expr e = parse_expr(text);
  Substitution subs;
  for (const auto& v : free_variables(e)) subs.emplace(v, resolve_symbol(v, pp, td));
  return substitute(e, subs);
}

// mne1: omega = a1 nu1 + a2 nu2 + a3 nu3 + v lambda.
constexpr std::string_view kOmega1Nu1 = "4*DxTs - 2*Ts*DyRs + 4*Rp*Ts - 2*Rs^2*Tp*Ts - 2*Rs*Tq*Ts + 4*Rq*Ts^2";
constexpr std::string_view kOmega1Nu2 = "4*DyRs - 2*Rs*DxTs + 4*Rs*Tq - 2*Rq*Rs*Ts^2 - 2*Rp*Rs*Ts + 4*Rs^2*Tp";
constexpr std::string_view kOmega1Nu3 = "2*(4 - Rs*Ts)*(Rs*Ts - 1)";
constexpr std::string_view kTwoV =
    "8*DxTq - 4*DyDyRs + 4*DxTs*DyRs + 4*Rs*DxTp - 4*Rs*DyTq - 4*Rs^2*DyTp"
    " + 8*Rq*Tp - 14*Rs*Tp*DyRs + 4*Rp*Rs*Tp + 3*Rs^2*Tp*DxTs - 6*Rs^3*Tp^2 - 4*Tq*DyRs"
    " + 4*Rs*Tq*DxTs - 6*Rs^2*Tp*Tq + 8*Ts*DyRq - 2*DyRs^2*Ts + 4*Rp*Ts*DyRs - 2*Rs*Ts*DxTq"
    " + Rs*Ts*DyDyRs + 4*Rs*Ts*DyRp - Rs^2*Ts*DxTp + Rs^2*Ts*DyTq + Rs^3*Ts*DyTp + 8*Rz*Ts"
    " + 2*Rq*Rs*Tp*Ts + 2*Rp*Rs^2*Tp*Ts + 8*Rq*Tq*Ts - 3*Rs*Tq*Ts*DyRs + 4*Rp*Rs*Tq*Ts"
    " - 2*Rs^3*Tp*Tq*Ts - 2*Rs^2*Tq^2*Ts + 4*Rq*Ts^2*DyRs - 2*Rs*Ts^2*DyRq - Rs^2*Ts^2*DyRp - 2*Rs*Rz*Ts^2"
    " + 2*Rq*Rs^2*Tp*Ts^2 + 2*Rq*Rs*Tq*Ts^2 + 8*Rs*Tz - 2*Rs^2*Ts*Tz";
constexpr std::string_view kAlpha1X =
    "(8*DyRs + 16*Rp - 8*Rs*DxTs + 8*Rs^2*Tp + 8*Rs*Tq - 24*Rq*Ts - 4*Rs*Ts*DyRs"
    " - 16*Rp*Rs*Ts + 3*Rs^2*Ts*DxTs - 4*Rs^3*Tp*Ts - 4*Rs^2*Tq*Ts + 10*Rq*Rs*Ts^2 + 4*Rp*Rs^2*Ts^2)"
    "/(4 - Rs*Ts)^2";
constexpr std::string_view kAlpha1Y =
    "(8*DxTs + 16*Tq - 8*Ts*DyRs + 8*Rq*Ts^2 + 8*Rp*Ts - 24*Rs*Tp - 4*Rs*Ts*DxTs"
    " - 16*Rs*Tq*Ts + 3*Rs*Ts^2*DyRs - 4*Rq*Rs*Ts^3 - 4*Rp*Rs*Ts^2 + 10*Rs^2*Tp*Ts + 4*Rs^2*Tq*Ts^2)"
    "/(4 - Rs*Ts)^2";

// mne2: omega' = b1 nu1 + b2 nu2 + (1 - Rs Ts) nu3 - v'/(2 Rs^3 Ts) lambda.
constexpr std::string_view kOmega2Nu1 = "(-DyTs + 2*Tp - Rs*Tp*Ts + Tq*Ts)/Ts";
constexpr std::string_view kOmega2Nu2 = "(-DxRs + 2*Rq - Rq*Rs*Ts + Rp*Rs)/Rs";
constexpr std::string_view kVPrime =
    "2*Rs^2*DxRs*DyTs - 4*Rq*Rs^2*DyTs - Rp*Rs^3*DyTs - 4*Rs^2*Tp*DxRs"
    " + 8*Rq*Rs^2*Tp + 2*Rp*Rs^3*Tp + 2*DxRs^2*Ts - 8*Rq*Ts*DxRs + 8*Rq^2*Ts"
    " - 2*Rp*Rs*Ts*DxRs + 4*Rp*Rq*Rs*Ts - Rs^2*Ts*DxDyRs + 2*Rs^2*Ts*DyRq + Rs^3*Ts*DxTq"
    " + Rs^3*Ts*DyRp - Rq*Rs^3*Tp*Ts - 3*Rs^2*Tq*Ts*DxRs + 6*Rq*Rs^2*Tq*Ts + Rp*Rs^3*Tq*Ts"
    " + 2*Rq*Rs*Ts^2*DxRs - 4*Rq^2*Rs*Ts^2 + Rs^3*Rz*Ts^2 + Rs^4*Ts*Tz";
constexpr std::string_view kAlpha2X = "(DxRs - 2*Rq)/Rs";
constexpr std::string_view kAlpha2Y = "(DyTs - 2*Tp)/Ts";

bool identically_zero_on_jet(const Expr& e) {
  if (e.is_constant()) return e.is_zero();
  SampleDomain dom;
  for (const char* v : kJet) dom.set(v, -0.9, 0.9);
  dom.guard_floor = 1e-12;
  return is_identically_zero(e, dom).verdict == ZeroVerdict::Zero;
}

}  // namespace

std::string metric_kind_name(MetricKind k) { return k == MetricKind::Mne1 ? "mne1" : "mne2"; }

ContactForms contact_forms(const PdePair& pp, const TotalDerivatives& td) {
  const Chart& c = jet_chart();
  const Expr one(1);
  return {DiffForm::one_form(c, {{"z", one}, {"x", -var("p")}, {"y", -var("q")}}),
          DiffForm::one_form(c, {{"p", one}, {"x", -pp.R}, {"y", -var("s")}}),
          DiffForm::one_form(c, {{"q", one}, {"x", -var("s")}, {"y", -pp.T}}),
          DiffForm::one_form(c, {{"s", one}, {"x", -td.DyR}, {"y", -td.DxT}})};
}

DegenerateMetric build_metric(const PdePair& pp, MetricKind kind) {
  const auto td = total_derivative_fields(pp);
  const auto cf = contact_forms(pp, td);
  const Chart& chart = jet_chart();
  DegenerateMetric m{kind, SymmetricTensor(chart), DiffForm(chart, 1), Expr(0), Expr(0), Expr(0)};
  const Expr& Rs = pp.Rs;
  const Expr& Ts = pp.Ts;
  if (kind == MetricKind::Mne1) {
    if (identically_zero_on_jet(pp.four_minus_RsTs)) throw std::domain_error("mne1 requires R_s T_s != 4");
    const Expr a1 = formula(kOmega1Nu1, pp, td);
    const Expr a2 = formula(kOmega1Nu2, pp, td);
    const Expr a3 = formula(kOmega1Nu3, pp, td);
    m.v = formula(kTwoV, pp, td) / Expr(2);
    m.omega = a1 * cf.nu1 + a2 * cf.nu2 + a3 * cf.nu3 + m.v * cf.lambda;
    const Expr k = Expr(2) * (pp.RsTs - Expr(4));
    m.g = sym_sum(chart, {{Expr(2) * a1, cf.lambda, cf.nu1},
                          {Expr(2) * a2, cf.lambda, cf.nu2},
                          {Expr(2) * a3, cf.lambda, cf.nu3},
                          {Expr(2) * m.v, cf.lambda, cf.lambda},
                          {k * Ts, cf.nu1, cf.nu1},
                          {Expr(-2) * k, cf.nu1, cf.nu2},
                          {k * Rs, cf.nu2, cf.nu2}});
    m.alpha_x = formula(kAlpha1X, pp, td);
    m.alpha_y = formula(kAlpha1Y, pp, td);
  } else {
    if (identically_zero_on_jet(pp.RsTs)) throw std::domain_error("mne2 requires R_s T_s != 0");
    const Expr b1 = formula(kOmega2Nu1, pp, td);
    const Expr b2 = formula(kOmega2Nu2, pp, td);
    const Expr b3 = pp.one_minus_RsTs;
    m.v = formula(kVPrime, pp, td);
    const Expr c = -m.v / (Expr(2) * pow(Rs, 3) * Ts);
    m.omega = b1 * cf.nu1 + b2 * cf.nu2 + b3 * cf.nu3 + c * cf.lambda;
    m.g = sym_sum(chart, {{Expr(2) * b1, cf.lambda, cf.nu1},
                          {Expr(2) * b2, cf.lambda, cf.nu2},
                          {Expr(2) * b3, cf.lambda, cf.nu3},
                          {Expr(2) * c, cf.lambda, cf.lambda},
                          {Ts, cf.nu1, cf.nu1},
                          {Expr(-2), cf.nu1, cf.nu2},
                          {Rs, cf.nu2, cf.nu2}});
    m.alpha_x = formula(kAlpha2X, pp, td);
    m.alpha_y = formula(kAlpha2Y, pp, td);
  }
  return m;
}

SymmetricTensor lie_derivative(const SymmetricTensor& g, const std::vector<Expr>& X) {
  const std::size_t n = g.dim();
  if (X.size() != n) throw std::invalid_argument("vector field size does not match the chart");
  std::vector<std::vector<Expr>> dX(n, std::vector<Expr>(n));  // dX[i][k] = d_i X^k
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) dX[i][k] = differentiate(X[k], g.chart().name(i));
  }
  SymmetricTensor out(g.chart());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      std::vector<Expr> terms;
      for (std::size_t k = 0; k < n; ++k) {
        terms.push_back(X[k] * differentiate(g.at(i, j), g.chart().name(k)));
        terms.push_back(g.at(k, j) * dX[i][k]);
        terms.push_back(g.at(i, k) * dX[j][k]);
      }
      out.set(i, j, sum(std::move(terms)));
    }
  }
  return out;
}

Report degeneracy_and_descent_check(const DegenerateMetric& m, const PdePair& pp, const SampleDomain& dom) {
  const auto td = total_derivative_fields(pp);
  SampleDomain d = dom;
  if (m.kind == MetricKind::Mne1) {
    d.guard(pp.four_minus_RsTs);
  } else {
    d.guard(pp.Rs).guard(pp.Ts);
  }
  const std::vector<Expr> Dx(td.Dx.begin(), td.Dx.end());
  const std::vector<Expr> Dy(td.Dy.begin(), td.Dy.end());
  Report r;
  r.title = "degeneracy and descent (" + metric_kind_name(m.kind) + ")";
  r.add(zero_check("g(Dx,.)", all_identically_zero(contract(m.g, Dx).coefficients(), d)));
  r.add(zero_check("g(Dy,.)", all_identically_zero(contract(m.g, Dy).coefficients(), d)));
  const auto lx = lie_derivative(m.g, Dx) - m.alpha_x * m.g;
  const auto ly = lie_derivative(m.g, Dy) - m.alpha_y * m.g;
  r.add(zero_check("L_Dx g - alpha(Dx) g", all_identically_zero(lx.entries(), d)));
  r.add(zero_check("L_Dy g - alpha(Dy) g", all_identically_zero(ly.entries(), d)));
  return r;
}

Metric4::Metric4(SymmetricTensor g) : g_(std::move(g)) {
  if (g_.dim() != 4) throw std::invalid_argument("Metric4 needs a 4-coordinate chart");
}

Metric4 conformal_rescale(const Metric4& g, const Expr& phi) {
  Metric4 out = g;
  const Expr f = exp(Expr(2) * phi);
  out.g_ = f * g.g_;
  out.history_.push_back(phi);
  return out;
}

Metric4 conformal_rescale(const Metric4& g, NumericFactor phi) {
  Metric4 out = g;
  out.numeric_.push_back(std::move(phi));
  return out;
}

Metric4 descend(const DegenerateMetric& m, const Expr& x0, const Expr& y0) {
  return Metric4(restrict_to_slice(m.g, {{"x", x0}, {"y", y0}}));
}

namespace {

Expr det4(const Metric4& g) {
  // Laplace expansion along the first row with 2x2 minors of the bottom rows.
  auto a = [&](int i, int j) { return g.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)); };
  auto m2 = [&](int c0, int c1) { return a(2, c0) * a(3, c1) - a(2, c1) * a(3, c0); };
  auto m3 = [&](int r, int c0, int c1, int c2) {
    return a(r, c0) * m2(c1, c2) - a(r, c1) * m2(c0, c2) + a(r, c2) * m2(c0, c1);
  };
  return sum({a(0, 0) * m3(1, 1, 2, 3), -(a(0, 1) * m3(1, 0, 2, 3)), a(0, 2) * m3(1, 0, 1, 3),
              -(a(0, 3) * m3(1, 0, 1, 2))});
}

}  // namespace

Report nondegeneracy_check(const Metric4& g, const SampleDomain& dom) {
  const Expr det = det4(g);
  SampleDomain d = dom;
  d.guards.clear();  // judge singularity ourselves
  const SampleSet set = draw_samples({det}, d);
  int singular = 0;
  double smallest = INFINITY;
  std::optional<EvalPoint> witness;
  for (const auto& s : set.accepted) {
    const double v = std::abs(s.values[0]);
    if (v < smallest) {
      smallest = v;
      witness = s.point;
    }
    if (v <= dom.guard_floor) ++singular;
  }
  Report r;
  r.title = "nondegeneracy";
  Check c;
  c.name = "det g != 0";
  c.residual = set.accepted.empty() ? 1.0 : static_cast<double>(singular) / static_cast<double>(set.accepted.size());
  c.tolerance = 0.1;
  c.verdict = set.accepted.empty() ? Verdict::Inconclusive : (c.residual > 0.1 ? Verdict::Fail : Verdict::Pass);
  c.detail = "min |det| = " + std::to_string(smallest);
  if (c.verdict == Verdict::Fail) c.witness = witness;
  r.add(std::move(c));
  return r;
}

}  // namespace paracr
