#include "paracr/ode.hpp"

#include <cmath>
#include <limits>

#include "paracr/forms.hpp"
#include "paracr/tape.hpp"

namespace paracr {

namespace {

// J with two misprints of the published form repaired: the p_1111 term
// carries (p_x1 + p p_y1), and p_x1 appears once in 10 p_1 p_11 p_111 p_x1.
constexpr const char* kJNumerator =
    "-15*p11^3*px1 + 10*p1*p11*p111*px1 + 15*p1*p11^2*px11 - 4*p1^2*p111*px11"
    " + 12*p1^2*p11^2*py1 - 15*p*p11^3*py1 - 4*p1^3*p111*py1 + 10*p*p1*p11*p111*py1"
    " - 12*p1^3*p11*py11 + 15*p*p1*p11^2*py11 - 4*p*p1^2*p111*py11 - 6*p1^2*p11*px111"
    " + 4*p1^2*(p1^2 - 3/2*p*p11)*py111 - p1^2*(px1 + p*py1)*p1111 + p1^3*(px1111 + p*py1111)";

constexpr const char* kKNumerator =
    "-15*p11*px1^3 + 15*p1*px1^2*px11 + 10*p1*p11*px1*pxx1 - 4*p1^2*px11*pxx1"
    " - 6*p1^2*px1*pxx11 - p1^2*p11*pxxx1 + p1^3*pxxx11 - 2*p1^4*pxxy1 - 3*p*p1^2*p11*pxxy1"
    " + 3*p*p1^3*pxxy11 - p1^2*p11*px1*pxy + p1^3*px11*pxy - 3*p1^2*p11*px*pxy1 + 6*p1^3*px1*pxy1"
    " + 20*p*p1*p11*px1*pxy1 - 8*p*p1^2*px11*pxy1 + 3*p1^3*px*pxy11 - 12*p*p1^2*px1*pxy11 + 2*p1^5*pxyy"
    " - 4*p*p1^4*pxyy1 - 3*p^2*p1^2*p11*pxyy1 + 3*p^2*p1^3*pxyy11 + 10*p1*p11*px1^2*py - 10*p1^2*px1*px11*py"
    " - 3*p1^2*p11*pxx1*py + 3*p1^3*pxx11*py - 6*p1^4*pxy1*py - 9*p*p1^2*p11*pxy1*py + 9*p*p1^3*pxy11*py"
    " - 2*p1^2*p11*px1*py^2 + 2*p1^3*px11*py^2 + 10*p1*p11*px*px1*py1 - 6*p1^2*px1^2*py1 - 45*p*p11*px1^2*py1"
    " - 4*p1^2*px*px11*py1 + 30*p*p1*px1*px11*py1 - p1^2*p11*pxx*py1 + 2*p1^3*pxx1*py1"
    " + 10*p*p1*p11*pxx1*py1 - 6*p*p1^2*pxx11*py1 - 2*p1^4*pxy*py1 - 3*p*p1^2*p11*pxy*py1"
    " + 10*p*p1^3*pxy1*py1 + 20*p^2*p1*p11*pxy1*py1 - 12*p^2*p1^2*pxy11*py1 - 4*p1^2*p11*px*py*py1"
    " + 8*p1^3*px1*py*py1 + 30*p*p1*p11*px1*py*py1 - 14*p*p1^2*px11*py*py1 - 4*p1^4*py^2*py1"
    " - 6*p*p1^2*p11*py^2*py1 + 2*p1^3*px*py1^2 + 10*p*p1*p11*px*py1^2 - 12*p*p1^2*px1*py1^2"
    " - 45*p^2*p11*px1*py1^2 + 15*p^2*p1*px11*py1^2 + 10*p*p1^3*py*py1^2 + 20*p^2*p1*p11*py*py1^2"
    " - 6*p^2*p1^2*py1^3 - 15*p^3*p11*py1^3 - 6*p1^2*px*px1*py11 + 15*p*p1*px1^2*py11 + p1^3*pxx*py11"
    " - 4*p*p1^2*pxx1*py11 + 3*p*p1^3*pxy*py11 - 8*p^2*p1^2*pxy1*py11 + 4*p1^3*px*py*py11"
    " - 16*p*p1^2*px1*py*py11 + 6*p*p1^3*py^2*py11 - 10*p*p1^2*px*py1*py11 + 30*p^2*p1*px1*py1*py11"
    " - 20*p^2*p1^2*py*py1*py11 + 15*p^3*p1*py1^2*py11 - 2*p1^4*px1*pyy - p*p1^2*p11*px1*pyy"
    " + p*p1^3*px11*pyy + 4*p1^5*py*pyy - 4*p*p1^4*py1*pyy - 2*p^2*p1^2*p11*py1*pyy + 2*p^2*p1^3*py11*pyy"
    " - 2*p1^4*px*pyy1 - 3*p*p1^2*p11*px*pyy1 + 6*p*p1^3*px1*pyy1 + 10*p^2*p1*p11*px1*pyy1"
    " - 4*p^2*p1^2*px11*pyy1 - 8*p*p1^4*py*pyy1 - 6*p^2*p1^2*p11*py*pyy1 + 8*p^2*p1^3*py1*pyy1"
    " + 10*p^3*p1*p11*py1*pyy1 - 4*p^3*p1^2*py11*pyy1 + 3*p*p1^3*px*pyy11 - 6*p^2*p1^2*px1*pyy11"
    " + 6*p^2*p1^3*py*pyy11 - 6*p^3*p1^2*py1*pyy11 + 2*p*p1^5*pyyy - 2*p^2*p1^4*pyyy1"
    " - p^3*p1^2*p11*pyyy1 + p^3*p1^3*pyyy11";

// Names like "pxy11" denote partial derivatives of p (x, y, a1).
Expr with_partials(const char* text, const Expr& p) {
  const Expr f = parse_expr(text);
  Substitution sub;
  for (const auto& name : free_variables(f)) {
    Expr e = p;
    for (char c : name.substr(1)) e = differentiate(e, c == 'x' ? "x" : c == 'y' ? "y" : "a1");
    sub[name] = e;
  }
  return substitute(f, sub);
}

void require_a1(const Expr& p, const std::vector<const char*>& allowed, const SampleDomain& dom) {
  for (const auto& v : free_variables(p)) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || v == a;
    if (!ok) throw std::invalid_argument("p may not depend on '" + v + "'");
  }
  const Expr p1 = differentiate(p, "a1");
  if (p1.is_zero() || (!p1.is_constant() && is_identically_zero(p1, dom).verdict == ZeroVerdict::Zero)) {
    throw std::invalid_argument("dp/da1 vanishes identically");
  }
}

double scale(double v) { return std::max(1.0, std::abs(v)); }

}  // namespace

ParaCrDatum112 ParaCrDatum112::make(const Expr& p) {
  require_a1(p, {"x", "y", "a1", "a2"}, ode_domain(-1, 1));
  return {p};
}

ParaCrDatum111 ParaCrDatum111::make(const Expr& p) {
  SampleDomain dom;
  dom.set("x", -1, 1).set("y", -1, 1).set("a1", -1, 1);
  require_a1(p, {"x", "y", "a1"}, dom);
  return {p};
}

std::string branch_name(Branch b) {
  switch (b) {
    case Branch::Generic: return "generic";
    case Branch::Degenerate: return "degenerate";
    case Branch::Mixed: return "mixed";
  }
  return "?";
}

SampleDomain ode_domain(double lo, double hi, int samples, std::uint64_t seed) {
  SampleDomain dom;
  dom.set("x", lo, hi).set("y", lo, hi).set("a1", lo, hi).set("a2", lo, hi);
  dom.samples = samples;
  dom.seed = seed;
  return dom;
}

InvariantI invariant_I(const ParaCrDatum112& d, const SampleDomain& dom) {
  const Expr& p = d.p;
  auto D = [](const Expr& e, const char* v) { return differentiate(e, v); };
  const Expr p1 = D(p, "a1"), p2 = D(p, "a2");
  InvariantI r;
  r.I = p1 * (D(p2, "x") + p * D(p2, "y")) - p2 * (D(p1, "x") + p * D(p1, "y"));
  r.test = is_identically_zero(r.I, dom);
  if (r.test.verdict == ZeroVerdict::Zero) {
    r.branch = Branch::Degenerate;
    return r;
  }
  const SampleSet set = draw_samples({r.I}, dom);
  r.min_abs = std::numeric_limits<double>::infinity();
  bool pos = false, neg = false;
  for (const auto& s : set.accepted) {
    r.min_abs = std::min(r.min_abs, std::abs(s.values[0]));
    pos = pos || s.values[0] > 0;
    neg = neg || s.values[0] < 0;
  }
  // A sign change means I vanishes somewhere in the box.
  r.branch = r.test.verdict == ZeroVerdict::Nonzero && !(pos && neg) && r.min_abs > dom.guard_floor ? Branch::Generic
                                                                                                     : Branch::Mixed;
  return r;
}

ThirdOrderODE third_order_system(const ParaCrDatum112& d) {
  const Expr& p = d.p;
  ThirdOrderODE s;
  s.p = p;
  s.q = differentiate(p, "x") + p * differentiate(p, "y");
  s.F = differentiate(s.q, "x") + p * differentiate(s.q, "y");
  s.p1 = differentiate(p, "a1");
  s.p2 = differentiate(p, "a2");
  s.q1 = differentiate(s.q, "a1");
  s.q2 = differentiate(s.q, "a2");
  return s;
}

double safeguarded_newton(const std::function<std::pair<double, double>(double)>& f, double x0, Interval bracket,
                          double tol, int max_iter, int* iterations) {
  double x = x0;
  auto [fx, dfx] = f(x);
  // Sign-change bracket, once one is seen.
  bool have = false;
  double a = 0, fa = 0, b = 0;
  for (int it = 0; it < max_iter; ++it) {
    if (iterations) *iterations = it;
    if (!std::isfinite(fx)) throw ReductionError("root-find hit a non-finite value");
    if (std::abs(fx) <= tol) return x;
    double next = std::numeric_limits<double>::quiet_NaN();
    if (std::isfinite(dfx) && dfx != 0.0) next = x - fx / dfx;
    const bool outside = !(next >= bracket.lo && next <= bracket.hi) ||
                         (have && !(next >= std::min(a, b) && next <= std::max(a, b)));
    double step = next - x;
    if (outside && have) {
      next = 0.5 * (a + b);
    } else if (outside) {
      if (!std::isfinite(step)) throw ReductionError("root-find stalled: zero derivative");
      next = std::clamp(next, bracket.lo, bracket.hi);
      step = next - x;
    }
    auto [fn, dfn] = f(next);
    // Damp steps that do not reduce |f| (only without a bracket to fall back on).
    for (int k = 0; !have && k < 30 && !(std::isfinite(fn) && std::abs(fn) < std::abs(fx)); ++k) {
      step *= 0.5;
      next = x + step;
      std::tie(fn, dfn) = f(next);
    }
    if (!std::isfinite(fn)) throw ReductionError("root-find diverged");
    if (fn * fx < 0) {
      have = true;
      a = x;
      fa = fx;
      b = next;
    } else if (have) {
      if (fn * fa < 0) {
        b = next;
      } else {
        a = next;
        fa = fn;
      }
    }
    x = next;
    fx = fn;
    dfx = dfn;
    if (have && std::abs(b - a) <= 4 * std::numeric_limits<double>::epsilon() * scale(x)) return x;
  }
  throw ReductionError("root-find did not converge");
}

Reduction reduce_to_third_order(const ParaCrDatum112& d, const JetPoint3& pt, double a2_seed, const ReduceOptions& opt) {
  return reduce_to_third_order(third_order_system(d), pt, a2_seed, opt);
}

Reduction reduce_to_third_order(const ThirdOrderODE& sys, const JetPoint3& pt, double a2_seed, const ReduceOptions& opt) {
  const Tape tape({sys.p, sys.p1, sys.p2, sys.q, sys.q1, sys.q2, sys.F}, {"x", "y", "a1", "a2"});
  std::vector<double> out;
  auto eval = [&](double a1, double a2) {
    const auto st = tape.run(std::vector<double>{pt.x, pt.y, a1, a2}, out);
    if (!st.ok) throw ReductionError(std::string("evaluation failed: ") + st.error);
    return out;
  };
  Reduction r;
  double a1 = opt.a1_seed;
  int inner_total = 0;
  // a1 on the fiber y1 = p(x, y, a1, a2).
  auto solve_a1 = [&](double a2) {
    int it = 0;
    a1 = safeguarded_newton(
        [&](double v) {
          const auto o = eval(v, a2);
          return std::make_pair(o[0] - pt.y1, o[1]);
        },
        a1, opt.a1_bracket, opt.tol * scale(pt.y1), opt.max_iter, &it);
    inner_total += it;
    const auto o = eval(a1, a2);
    if (std::abs(o[1]) < opt.singular) throw ReductionError("|dp/da1| below threshold at the solve point");
    return o;
  };
  // dy2/da2 along the fiber: q_2 + q_1 da1/da2 with da1/da2 = -p_2/p_1.
  auto dq_da2 = [](const std::vector<double>& o) { return o[5] - o[4] * o[2] / o[1]; };
  int outer = 0;
  const double a2 = safeguarded_newton(
      [&](double v) {
        const auto o = solve_a1(v);
        const double slope = dq_da2(o);
        if (std::abs(slope) < opt.singular) throw ReductionError("|dy2/da2| below threshold");
        return std::make_pair(o[3] - pt.y2, slope);
      },
      a2_seed, opt.a2_bracket, opt.tol * scale(pt.y2), opt.max_iter, &outer);
  const auto o = solve_a1(a2);
  if (std::abs(dq_da2(o)) < opt.singular) throw ReductionError("|dy2/da2| below threshold at the solve point");
  r.F = o[6];
  r.a1 = a1;
  r.a2 = a2;
  r.iterations = outer + inner_total;
  return r;
}

std::pair<Expr, Expr> second_order_invariants(const ParaCrDatum111& d) {
  return {with_partials(kJNumerator, d.p), with_partials(kKNumerator, d.p)};
}

Report check_solution_ode(const Expr& F, const Expr& psi, const SampleDomain& dom, double tol) {
  const Expr px = differentiate(psi, "x");
  const Expr pxx = differentiate(px, "x");
  const Expr res = differentiate(pxx, "x") - substitute(F, {{"y", psi}, {"y1", px}, {"y2", pxx}});
  const SampleSet set = draw_samples({res}, dom);
  double worst = 0.0;
  std::optional<EvalPoint> witness;
  for (const auto& s : set.accepted) {
    if (std::abs(s.values[0]) >= worst) {
      worst = std::abs(s.values[0]);
      witness = s.point;
    }
  }
  Report r;
  r.title = "ode solution";
  Check c = bound_check("y''' - F", worst, tol, witness);
  if (set.inconclusive() || static_cast<int>(set.accepted.size()) < dom.samples) {
    if (c.verdict == Verdict::Pass) c.verdict = Verdict::Inconclusive;
    c.detail = std::to_string(set.rejected) + " samples rejected by guards";
  }
  if (c.verdict == Verdict::Pass) c.witness.reset();
  r.add(std::move(c));
  return r;
}

}  // namespace paracr
