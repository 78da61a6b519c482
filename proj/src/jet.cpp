#include "paracr/jet.hpp"

#include <cmath>

#include "paracr/tape.hpp"

namespace paracr {

namespace {

const std::array<const char*, 6> kJet = {"x", "y", "z", "p", "q", "s"};

Expr d(const Expr& e, const char* v) { return differentiate(e, v); }

}  // namespace

const Chart& jet_chart() {
  static const Chart chart({"x", "y", "z", "p", "q", "s"});
  return chart;
}

PdePair PdePair::make(const Expr& R, const Expr& T) {
  for (const auto& v : free_variables(std::vector<Expr>{R, T})) {
    if (jet_chart().index_of(v) < 0) throw std::invalid_argument("R and T may only depend on x,y,z,p,q,s; got '" + v + "'");
  }
  PdePair pp;
  pp.R = R;
  pp.T = T;
  pp.Rs = d(R, "s");
  pp.Ts = d(T, "s");
  pp.RsTs = pp.Rs * pp.Ts;
  pp.one_minus_RsTs = Expr(1) - pp.RsTs;
  pp.four_minus_RsTs = Expr(4) - pp.RsTs;
  if (pp.one_minus_RsTs.is_zero()) throw DegeneratePair("1 - R_s T_s vanishes identically");
  if (!pp.one_minus_RsTs.is_constant()) {
    SampleDomain dom;
    for (const char* v : kJet) dom.set(v, -0.9, 0.9);
    dom.guard_floor = 1e-12;
    if (is_identically_zero(pp.one_minus_RsTs, dom).verdict == ZeroVerdict::Zero) {
      throw DegeneratePair("1 - R_s T_s vanishes identically");
    }
  }
  return pp;
}

TotalDerivatives total_derivative_fields(const PdePair& pp) {
  const Expr p = var("p");
  const Expr q = var("q");
  const Expr s = var("s");
  const Expr& R = pp.R;
  const Expr& T = pp.T;
  // D_x T = A + T_s D_y R and D_y R = B + R_s D_x T, solved.
  const Expr A = sum({d(T, "x"), p * d(T, "z"), R * d(T, "p"), s * d(T, "q")});
  const Expr B = sum({d(R, "y"), q * d(R, "z"), s * d(R, "p"), T * d(R, "q")});
  TotalDerivatives td;
  td.DxT = (A + pp.Ts * B) / pp.one_minus_RsTs;
  td.DyR = (B + pp.Rs * A) / pp.one_minus_RsTs;
  td.Dx = {Expr(1), Expr(0), p, R, s, td.DyR};
  td.Dy = {Expr(0), Expr(1), q, s, T, td.DxT};
  return td;
}

Expr apply_total(const TotalDerivatives& td, char which, const Expr& f) {
  if (which != 'x' && which != 'y') throw std::invalid_argument("total derivative direction must be x or y");
  const auto& field = which == 'x' ? td.Dx : td.Dy;
  std::vector<Expr> terms;
  for (std::size_t i = 0; i < 6; ++i) {
    if (field[i].is_zero()) continue;
    Expr df = differentiate(f, kJet[i]);
    if (!df.is_zero()) terms.push_back(field[i] * df);
  }
  return sum(std::move(terms));
}

Expr integrability_residual(const PdePair& /*pp*/, const TotalDerivatives& td) {
  return apply_total(td, 'x', td.DxT) - apply_total(td, 'y', td.DyR);
}

Expr integrability_residual(const PdePair& pp) { return integrability_residual(pp, total_derivative_fields(pp)); }

Report commutator_residual(const PdePair& pp, const SampleDomain& dom) {
  const auto td = total_derivative_fields(pp);
  const Expr integ = integrability_residual(pp, td);
  Report r;
  r.title = "commutator";
  for (std::size_t i = 0; i < 6; ++i) {
    Expr c = apply_total(td, 'x', td.Dy[i]) - apply_total(td, 'y', td.Dx[i]);
    if (i == 5) c = c - integ;
    r.add(zero_check(std::string("[Dx,Dy]^") + kJet[i] + (i == 5 ? " - integrability" : ""), is_identically_zero(c, dom)));
  }
  return r;
}

Report defining_relations_check(const PdePair& pp, const SampleDomain& dom) {
  const auto td = total_derivative_fields(pp);
  Report r;
  r.title = "defining relations";
  // D_x T computed with the solved D_y R in the s slot must reproduce DxT.
  r.add(zero_check("DxT relation", is_identically_zero(apply_total(td, 'x', pp.T) - td.DxT, dom)));
  r.add(zero_check("DyR relation", is_identically_zero(apply_total(td, 'y', pp.R) - td.DyR, dom)));
  return r;
}

std::pair<Expr, Expr> point_metricity_invariants(const PdePair& pp, const TotalDerivatives& td) {
  const Expr& Rs = pp.Rs;
  const Expr& Ts = pp.Ts;
  const Expr Rp = d(pp.R, "p"), Rq = d(pp.R, "q");
  const Expr Tp = d(pp.T, "p"), Tq = d(pp.T, "q");
  const Expr DxRs = apply_total(td, 'x', Rs), DyRs = apply_total(td, 'y', Rs);
  const Expr DxTs = apply_total(td, 'x', Ts), DyTs = apply_total(td, 'y', Ts);
  auto c = [](std::int64_t n) { return Expr(n); };
  Expr J1 = sum({(pp.RsTs - c(4)) * DxRs, Rs * (c(2) * DyRs - Rs * DxTs), c(8) * Rq, product({c(-6), Rq, Rs, Ts}),
                 product({c(4), Rp, Rs}), product({c(2), pow(Rs, 2), Tq}), product({c(-2), Rp, pow(Rs, 2), Ts}),
                 product({c(2), pow(Rs, 3), Tp})});
  Expr J2 = sum({(pp.RsTs - c(4)) * DyTs, Ts * (c(2) * DxTs - Ts * DyRs), c(8) * Tp, product({c(-6), Rs, Tp, Ts}),
                 product({c(4), Tq, Ts}), product({c(2), Rp, pow(Ts, 2)}), product({c(-2), Rs, Tq, pow(Ts, 2)}),
                 product({c(2), Rq, pow(Ts, 3)})});
  return {J1, J2};
}

std::pair<Expr, Expr> point_metricity_invariants(const PdePair& pp) {
  return point_metricity_invariants(pp, total_derivative_fields(pp));
}

std::pair<Expr, Expr> torsion_obstructions(const PdePair& pp) {
  const Expr w = sqrt(pp.one_minus_RsTs);
  const Expr Rss = d(pp.Rs, "s");
  const Expr Tss = d(pp.Ts, "s");
  const Expr tail = Tss * pow(pp.Rs, 2);
  return {Rss * pow(Expr(1) - w, 2) + tail, Rss * pow(Expr(1) + w, 2) + tail};
}

std::pair<Expr, Expr> contact_weyl_invariants(const PdePair& pp) {
  const Expr Rss = d(pp.Rs, "s"), Tss = d(pp.Ts, "s");
  const Expr Rsss = d(Rss, "s"), Tsss = d(Tss, "s");
  const Expr dRsTs = d(pp.RsTs, "s");
  return {Expr(2) * Rsss * pp.one_minus_RsTs + Expr(3) * Rss * dRsTs,
          Expr(2) * Tsss * pp.one_minus_RsTs + Expr(3) * Tss * dRsTs};
}

Report check_solution_pde(const PdePair& pp, const Expr& psi, const SampleDomain& dom, double tol) {
  const Expr px = d(psi, "x");
  const Expr py = d(psi, "y");
  const Substitution on_graph = {{"z", psi}, {"p", px}, {"q", py}, {"s", d(px, "y")}};
  const Expr rx = d(px, "x") - substitute(pp.R, on_graph);
  const Expr ry = d(py, "y") - substitute(pp.T, on_graph);
  const SampleSet set = draw_samples({rx, ry}, dom);
  Report r;
  r.title = "solution";
  const char* names[] = {"z_xx - R", "z_yy - T"};
  for (std::size_t k = 0; k < 2; ++k) {
    double worst = 0.0;
    std::optional<EvalPoint> witness;
    for (const auto& s : set.accepted) {
      if (std::abs(s.values[k]) >= worst) {
        worst = std::abs(s.values[k]);
        witness = s.point;
      }
    }
    Check c = bound_check(names[k], worst, tol, witness);
    if (set.inconclusive() || static_cast<int>(set.accepted.size()) < dom.samples) {
      if (c.verdict == Verdict::Pass) c.verdict = Verdict::Inconclusive;
      c.detail = std::to_string(set.rejected) + " samples rejected by guards";
    }
    if (c.verdict == Verdict::Pass) c.witness.reset();
    r.add(std::move(c));
  }
  return r;
}

Expr swap_xy(const Expr& e) {
  return substitute(e, {{"x", var("y")}, {"y", var("x")}, {"p", var("q")}, {"q", var("p")}});
}

PdePair swap_pair(const PdePair& pp) { return PdePair::make(swap_xy(pp.T), swap_xy(pp.R)); }

SampleDomain jet_domain(const PdePair& pp, double lo, double hi, int samples, std::uint64_t seed) {
  SampleDomain dom;
  for (const char* v : kJet) dom.set(v, lo, hi);
  dom.samples = samples;
  dom.seed = seed;
  dom.guard(pp.one_minus_RsTs);
  return dom;
}

}  // namespace paracr
