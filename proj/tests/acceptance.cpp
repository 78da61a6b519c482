// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "paracr/cli.hpp"
#include "paracr/curvature.hpp"
#include "paracr/metric.hpp"
#include "paracr/models.hpp"
#include "paracr/ode.hpp"
#include "paracr/ppwave.hpp"
#include "support.hpp"

using namespace paracr;

namespace {

// Pinned tolerances.
constexpr double kZero = 1e-9;
constexpr double kSliceRiemann = 1e-7;
constexpr double kCoframe = 1e-8;
constexpr double kNewman = 1e-9;
constexpr double kSolution = 1e-8;
constexpr double kScalarSd = 1e-7;
constexpr double kSiWeyl = 1e-6;
constexpr double kWeylRel = 1e-6;
constexpr double kQuadratic = 1e-7;
constexpr double kGaugeStep = 1e-3;
constexpr double kRicci = 1e-6;
constexpr double kParallel = 1e-6;
constexpr double kFlatWeyl = 1e-7;
constexpr double kReduction = 1e-7;
constexpr double kTranscription = 1e-9;
constexpr double kFd = 1e-6;
constexpr double kIdentities = 1e-7;

struct Outcome {
  bool pass = true;
  std::ostringstream note;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      note << " [failed: " << what << "]";
    }
  }
};

bool all_pass(const Report& r, Outcome& o, const std::string& prefix) {
  bool ok = true;
  for (const auto& c : r.checks) {
    if (c.verdict != Verdict::Pass) {
      o.require(false, prefix + c.name + " " + verdict_name(c.verdict));
      ok = false;
    }
  }
  return ok;
}

bool zero(const Expr& e, const SampleDomain& dom, Outcome& o, const std::string& name) {
  const auto z = is_identically_zero(e, dom);
  o.require(z.verdict == ZeroVerdict::Zero && (e.is_zero() || z.accepted >= dom.samples),
            name + " " + verdict_name(z.verdict) + " max " + std::to_string(z.max_abs));
  return z.verdict == ZeroVerdict::Zero;
}

int riemann_nonzero(const CurvatureReport& c) {
  if (!c.symbolic()) return -1;
  int n = 0;
  for (const auto& e : c.expressions().riemann) n += !e.is_zero();
  return n;
}

// 1. Flat pair: every invariant vanishes; mne1 descends to a flat metric.
void criterion1(Outcome& o) {
  const auto pp = PdePair::parse("0", "0");
  SampleDomain dom = jet_domain(pp, -1, 1, 20);
  dom.tol_zero = kZero;
  const auto td = total_derivative_fields(pp);
  zero(integrability_residual(pp, td), dom, o, "integrability");
  const auto [J1, J2] = point_metricity_invariants(pp, td);
  const auto [K1pt, K2pt] = torsion_obstructions(pp);
  const auto [K1ct, K2ct] = contact_weyl_invariants(pp);
  zero(J1, dom, o, "J1");
  zero(J2, dom, o, "J2");
  zero(K1pt, dom, o, "K1pt");
  zero(K2pt, dom, o, "K2pt");
  zero(K1ct, dom, o, "K1ct");
  zero(K2ct, dom, o, "K2ct");

  const auto m = build_metric(pp, MetricKind::Mne1);
  all_pass(degeneracy_and_descent_check(m, pp, dom), o, "descent ");
  const Metric4 g = descend(m);
  const CurvatureReport c(g);
  SampleDomain slice;
  for (const char* v : {"z", "p", "q", "s"}) slice.set(v, -1, 1);
  slice.samples = 20;
  const SampleSet set = draw_samples(g.tensor().entries(), slice);
  double worst = 0;
  for (const auto& s : set.accepted) worst = std::max(worst, max_abs(c.at(s.point).riemann));
  o.require(set.accepted.size() == 20, "20 slice samples");
  o.require(worst < kSliceRiemann, "slice Riemann " + std::to_string(worst));
  o.note << "7 invariants zero at 20 samples; slice Riemann max " << worst << " at " << set.accepted.size()
         << " samples";
}

// 2. The flat solution-space metric is exactly flat.
void criterion2(Outcome& o) {
  SymmetricTensor g(Chart({"a0", "a1", "a2", "a3"}));
  g.set(0, 3, Expr(1));
  g.set(1, 2, Expr(-1));
  const CurvatureReport c{Metric4(g)};
  const int n = riemann_nonzero(c);
  o.require(n == 0, "symbolic Riemann components nonzero: " + std::to_string(n));
  o.note << "symbolic pipeline, " << n << " of 256 Riemann components nonzero";
}

// 3. Tangency of neighbouring solutions iff the displacement is null.
void criterion3(Outcome& o) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1, 1);
  int disagreements = 0, tangent = 0;
  for (int k = 0; k < 500; ++k) {
    const std::array<double, 4> a = {u(rng), u(rng), u(rng), u(rng)};
    std::array<double, 4> da = {u(rng), u(rng), u(rng), 0};
    da[3] = (u(rng) < 0 ? -1 : 1) * (0.1 + std::abs(u(rng)));
    if (k % 2 == 0) da[0] = da[1] * da[2] / da[3];
    const double n2 = da[0] * da[0] + da[1] * da[1] + da[2] * da[2] + da[3] * da[3];
    const bool null = std::abs(da[0] * da[3] - da[1] * da[2]) < kNewman * n2;
    const auto t = newman_tangency(a, da, kNewman);
    disagreements += t.tangent != null;
    tangent += t.tangent;
  }
  o.require(disagreements == 0, std::to_string(disagreements) + " disagreements");
  o.note << "500 pairs, " << tangent << " tangent, " << disagreements << " disagreements";
}

// 4. Coframe structure equations and mutation sensitivity.
void criterion4(Outcome& o) {
  SampleDomain dom = flat_bundle_domain(30, 42, 0.1);
  dom.tol_zero = kCoframe;
  const auto c = flat_coframe();
  const auto r = verify_structure_equations(c, dom);
  o.require(r.checks.size() == 11, "11 equations");
  all_pass(r, o, "");
  double worst = 0;
  for (const auto& ch : r.checks) worst = std::max(worst, ch.residual);
  const Expr eps(Rational(1, 100));
  const auto& names = flat_bundle_chart().names();
  int detected = 0, total = 0;
  for (std::size_t i = 0; i < c.forms.size(); ++i) {
    for (const auto& n : names) {
      auto m = c;
      m.forms[i] = m.forms[i] + eps * DiffForm::differential(flat_bundle_chart(), n);
      ++total;
      detected += !verify_structure_equations(m, dom).passed();
    }
  }
  o.require(detected == total, std::to_string(total - detected) + " mutations undetected");
  o.note << "11 equations at 30 points, max residual " << worst << "; " << detected << "/" << total
         << " mutations detected";
}

// 5. Constant-curvature family.
void criterion5(Outcome& o) {
  const auto f = si_family(1.0);
  const auto sol = check_solution_pde(f.pair, f.psi, si_solution_domain(50, 42), kSolution);
  all_pass(sol, o, "solution ");
  double sol_res = 0;
  for (const auto& c : sol.checks) sol_res = std::max(sol_res, c.residual);
  const auto jdom = si_jet_domain(f.pair, 20, 42);
  zero(integrability_residual(f.pair), jdom, o, "integrability");
  const auto [J1, J2] = point_metricity_invariants(f.pair);
  zero(J1, jdom, o, "J1");
  zero(J2, jdom, o, "J2");

  const CurvatureReport c(f.g);
  const SampleSet set = draw_samples({f.g.at(0, 1)}, si_metric_domain(f, 50, 42));
  o.require(set.accepted.size() == 50, "50 metric samples");
  double mean = 0, sq = 0, weyl = 0;
  for (const auto& s : set.accepted) {
    const auto T = c.at(s.point);
    mean += T.scalar;
    sq += T.scalar * T.scalar;
    weyl = std::max(weyl, max_abs(T.weyl));
  }
  const double n = static_cast<double>(set.accepted.size());
  mean /= n;
  const double sd = std::sqrt(std::max(0.0, sq / n - mean * mean));
  o.require(sd < kScalarSd, "scalar sd " + std::to_string(sd));
  o.require(weyl < kSiWeyl, "Weyl " + std::to_string(weyl));
  const int flat = riemann_nonzero(CurvatureReport(si_family(0.0).g));
  o.require(flat == 0, "kappa = 0 Riemann");
  o.note << "solution residual " << sol_res << "; scalar " << mean << " sd " << sd << "; Weyl max " << weyl
         << "; kappa=0 Riemann components nonzero: " << flat;
}

double value_of(const Report& r, const std::string& name) {
  for (const auto& [n, v] : r.values) {
    if (n == name) return v;
  }
  return NAN;
}

// 6. pp-wave: Weyl pattern, type N, Ricci-flat gauge.
void criterion6(Outcome& o) {
  const auto f = PpWaveFamily::make(parse_expr("s^3"), parse_expr("s"), {-0.4, 0.4});
  PpWaveOptions opt;
  opt.weyl_rel_tol = kWeylRel;
  opt.quadratic_tol = kQuadratic;
  opt.ricci_tol = kRicci;
  opt.parallel_tol = kParallel;
  const auto ungauged = verify_ppwave(f, nullptr, opt);
  all_pass(ungauged, o, "ungauged ");
  o.require(ungauged.find("Weyl pattern vs Z1, Z2") != nullptr, "Weyl pattern check present");
  const auto g = ricci_flat_gauge(f, 0, 0, 0, f.range, kGaugeStep);
  const auto gauged = verify_ppwave(f, &g, opt);
  all_pass(gauged, o, "gauged ");
  const auto* ricci = gauged.find("Ricci");
  const auto* nabla = gauged.find("nabla d/dz");
  o.require(ricci && nabla, "Ricci and nabla checks present");
  o.note << "Weyl fit constant " << value_of(ungauged, "weyl_fit_constant") << ", pattern residual "
         << ungauged.find("Weyl pattern vs Z1, Z2")->residual << "; Ricci before "
         << value_of(ungauged, "ricci_max") << ", after " << (ricci ? ricci->residual : NAN) << "; nabla d/dz "
         << (nabla ? nabla->residual : NAN);
}

// 7. Linear r, t are conformally flat.
void criterion7(Outcome& o) {
  double worst = 0;
  for (const auto& [r, t] : {std::pair{"0.5*s + 1", "0.3*s"}, std::pair{"-2*s", "s/3 - 1"}}) {
    const auto f = PpWaveFamily::make(parse_expr(r), parse_expr(t));
    const auto [Z1, Z2] = z_invariants(f);
    o.require(Z1.is_zero() && Z2.is_zero(), std::string("Z1 = Z2 = 0 for ") + r + ", " + t);
    PpWaveOptions opt;
    opt.flat_tol = kFlatWeyl;
    const auto rep = verify_ppwave(f, nullptr, opt);
    all_pass(rep, o, "");
    o.require(rep.find("Weyl vanishes with Z1, Z2") != nullptr, "Weyl check present");
    worst = std::max(worst, value_of(rep, "weyl_max"));
  }
  o.require(worst < kFlatWeyl, "Weyl " + std::to_string(worst));
  o.note << "2 linear families, Z1 = Z2 = 0 exactly, Weyl max " << worst;
}

// 8. The worked example and a degenerate datum.
void criterion8(Outcome& o) {
  const auto d = ParaCrDatum112::make(parse_expr("x*a1 + y*a2"));
  SampleDomain dom = ode_domain(0.5, 2.0);
  dom.set("x", 1.0, 2.0).set("y", 0.1, 0.5);
  const auto inv = invariant_I(d, dom);
  o.require(inv.branch == Branch::Generic, "I branch " + branch_name(inv.branch));
  zero(inv.I - parse_expr("x*(x*a1 + y*a2) - y"), dom, o, "I = x p - y");

  const auto sys = third_order_system(d);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  double worst = 0;
  int points = 0;
  while (points < 20) {
    const JetPoint3 pt{u(rng), u(rng), 3 * u(rng), u(rng)};
    if (std::abs(pt.y1 * pt.x - pt.y) < 0.1) continue;
    const double expected = pt.y2 * (pt.y2 * pt.x - pt.y1) / (pt.y1 * pt.x - pt.y);
    try {
      const double got = reduce_to_third_order(sys, pt, 0.5).F;
      worst = std::max(worst, std::abs(got - expected) / std::max(1.0, std::abs(expected)));
    } catch (const ReductionError& e) {
      o.require(false, e.what());
    }
    ++points;
  }
  o.require(worst < kReduction, "reduction relative error " + std::to_string(worst));

  SampleDomain sdom;
  sdom.set("x", -1, 1).set("a0", 0.5, 2).set("a1", 0.5, 2).set("a2", 0.5, 2);
  sdom.samples = 50;
  const auto sol = check_solution_ode(parse_expr("y2*(y2*x - y1)/(y1*x - y)"),
                                      parse_expr("a0*exp(a2*x) - (a1/a2)*x - a1/a2^2"), sdom, kSolution);
  all_pass(sol, o, "");
  const auto deg = invariant_I(ParaCrDatum112::make(parse_expr("x*a1")), dom);
  o.require(deg.branch == Branch::Degenerate, "x a1 branch " + branch_name(deg.branch));
  o.note << "I generic (min |I| " << inv.min_abs << "); F relative error " << worst << " at 20 jet points; psi residual "
         << sol.checks[0].residual << "; x*a1 " << branch_name(deg.branch);
}

// 9. Second-order invariants.
void criterion9(Outcome& o) {
  const auto [J0, K0] = second_order_invariants(ParaCrDatum111::make(parse_expr("a1")));
  o.require(J0.is_zero() && K0.is_zero(), "p = a1 gives exact zeros");
  SampleDomain dom;
  dom.set("x", -0.5, 0.5).set("y", -0.5, 0.5).set("a1", 1.5, 2.5);
  dom.tol_zero = kZero;
  const auto [J, K] = second_order_invariants(ParaCrDatum111::make(parse_expr("1/(a1 - x)")));
  zero(J, dom, o, "Jnum");
  zero(K, dom, o, "Knum");

  const Expr P = parse_expr("a1^3*x/3 + y^2*a1^2 - x*y*a1 + x^3*y*a1^4/5 + a1*y^3");
  const auto [JP, KP] = second_order_invariants(ParaCrDatum111::make(P));
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1, 1);
  double worst = 0;
  for (int k = 0; k < 10; ++k) {
    const EvalPoint pt = {{"x", u(rng)}, {"y", u(rng)}, {"a1", u(rng)}};
    const auto [j, kk] = testing::jk_oracle(P, pt);
    worst = std::max(worst, std::abs(evaluate(JP, pt) - j) / std::max(1.0, std::abs(j)));
    worst = std::max(worst, std::abs(evaluate(KP, pt) - kk) / std::max(1.0, std::abs(kk)));
  }
  o.require(worst < kTranscription, "transcriptions differ by " + std::to_string(worst));
  o.note << "p=a1 exact zero; 1/(a1-x) zero at 20 samples; transcriptions agree to " << worst;
}

// 10. Engine oracles and report determinism.
void criterion10(Outcome& o) {
  // Symbolic derivatives against central differences.
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  double fd_worst = 0;
  int fd_checked = 0;
  auto fd_check = [&](const Expr& e, const EvalPoint& p, const std::string& v) {
    try {
      if (std::abs(evaluate(e, p)) > 1e3) return;
      const double exact = evaluate(differentiate(e, v), p);
      if (std::abs(exact) > 1e4) return;
      const double h = 1e-5;
      EvalPoint a = p, b = p;
      a[v] += h;
      b[v] -= h;
      const double fd = (evaluate(e, a) - evaluate(e, b)) / (2 * h);
      fd_worst = std::max(fd_worst, std::abs(exact - fd) / std::max(1.0, std::abs(exact)));
      ++fd_checked;
    } catch (const EvalError&) {
    }
  };
  for (int i = 0; i < 200; ++i) {
    const Expr e = testing::random_expr(rng, 4);
    for (int k = 0; k < 10; ++k) {
      const EvalPoint p{{"x", u(rng)}, {"y", u(rng)}, {"z", u(rng)}};
      for (const char* v : {"x", "y", "z"}) fd_check(e, p, v);
    }
  }
  const auto si = si_family(1.0);
  const auto jdom = si_jet_domain(si.pair, 10, 10);
  const SampleSet jet = draw_samples({si.pair.R, si.pair.T}, jdom);
  for (const auto& s : jet.accepted) {
    for (const auto& v : jet_chart().names()) {
      fd_check(si.pair.R, s.point, v);
      fd_check(si.pair.T, s.point, v);
    }
  }
  o.require(fd_worst < kFd, "derivative vs FD " + std::to_string(fd_worst));

  // Exterior derivative against differences, and d^2 = 0 on constructed forms.
  const auto cf = flat_coframe();
  SampleDomain fdom = flat_bundle_domain(5, 10, 0.5);
  fdom.set("a", 0.5, 2).set("f11", 0.5, 2).set("f22", 0.5, 2);
  double d_worst = 0;
  for (const auto& s : draw_samples({}, fdom).accepted) {
    for (const auto& f : cf.forms) {
      double scale = 1.0;
      for (const auto& c : exterior_derivative(f).coefficients()) scale = std::max(scale, std::abs(evaluate(c, s.point)));
      d_worst = std::max(d_worst, numeric_d_check(f, s.point) / scale);
    }
  }
  o.require(d_worst < kFd, "d vs FD " + std::to_string(d_worst));
  std::vector<DiffForm> forms(cf.forms.begin(), cf.forms.end());
  const auto ct = contact_forms(si.pair, total_derivative_fields(si.pair));
  for (const auto& f : {ct.lambda, ct.nu1, ct.nu2, ct.nu3}) forms.push_back(f);
  forms.push_back(wedge(cf.theta(1), cf.omega(2)));
  int dd_bad = 0;
  for (const auto& f : forms) {
    const auto dd = exterior_derivative(exterior_derivative(f)).coefficients();
    const bool on_bundle = f.chart() == flat_bundle_chart();
    SampleDomain dom = on_bundle ? fdom : si_jet_domain(si.pair, 20, 10);
    dom.samples = 20;
    if (!dd.empty() && all_identically_zero(dd, dom).verdict != ZeroVerdict::Zero) ++dd_bad;
  }
  o.require(dd_bad == 0, std::to_string(dd_bad) + " forms with d^2 != 0");

  // Curvature identities and Christoffels against differences.
  double chr_worst = 0;
  int id_fail = 0;
  const auto ppf = PpWaveFamily::make(parse_expr("s^3"), parse_expr("s"));
  const auto gauge = ricci_flat_gauge(ppf, 0, 0, 0, ppf.range, kGaugeStep);
  const std::vector<Metric4> metrics = {si.g, ppwave_metric(ppf), ppwave_metric(ppf, &gauge)};
  for (std::size_t m = 0; m < metrics.size(); ++m) {
    const Metric4& g = metrics[m];
    const CurvatureReport c(g);
    SampleDomain dom;
    for (const auto& v : g.chart().names()) dom.set(v, -0.35, 0.35);
    dom.samples = 20;
    dom.seed = 10;
    if (m == 0) dom = si_metric_domain(si, 20, 10);
    std::vector<EvalPoint> pts;
    for (const auto& s : draw_samples(g.tensor().entries(), dom).accepted) pts.push_back(s.point);
    const auto ids = curvature_identity_checks(c, pts, kIdentities);
    for (const auto& ch : ids.checks) {
      if (ch.verdict != Verdict::Pass) {
        ++id_fail;
        o.require(false, ch.name + " " + std::to_string(ch.residual));
      }
    }
    if (g.numeric_factors().empty()) {
      for (const auto& p : pts) chr_worst = std::max(chr_worst, christoffel_fd_residual(c, p));
    }
  }
  o.require(chr_worst < kFd, "Christoffel vs FD " + std::to_string(chr_worst));

  // Byte-identical reports.
  int jobs = 0, differing = 0;
  for (const auto& entry : std::filesystem::directory_iterator(PARACR_JOBS_DIR)) {
    if (entry.path().extension() != ".toml") continue;
    const auto cfg = cli::load_config(entry.path().string());
    const auto a = cli::render_report(cli::run_job(cfg), cli::Format::Json);
    const auto b = cli::render_report(cli::run_job(cli::load_config(entry.path().string())), cli::Format::Json);
    ++jobs;
    differing += a != b;
  }
  o.require(jobs > 0 && differing == 0, std::to_string(differing) + " of " + std::to_string(jobs) + " reports differ");
  o.note << fd_checked << " derivatives, max rel FD error " << fd_worst << "; d vs FD " << d_worst << "; d^2 = 0 on "
         << forms.size() << " forms; identities failing " << id_fail << ", Christoffel FD " << chr_worst << "; "
         << jobs << " job reports byte-identical on rerun";
}

}  // namespace

int main() {
  const std::function<void(Outcome&)> criteria[] = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                                     criterion6, criterion7, criterion8, criterion9, criterion10};
  int failed = 0;
  for (int i = 0; i < 10; ++i) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i](o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::cout << "criterion " << (i + 1) << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.note.str() << "  ("
              << std::fixed;
    std::cout.precision(2);
    std::cout << secs << " s)" << std::defaultfloat << std::endl;
    std::cout.precision(6);
  }
  std::cout << (failed == 0 ? "all criteria pass" : std::to_string(failed) + " criteria fail") << "\n";
  return failed == 0 ? 0 : 1;
}
