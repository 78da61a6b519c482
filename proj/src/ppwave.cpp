#include "paracr/ppwave.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include "paracr/tape.hpp"

namespace paracr {

namespace {

Expr ds(const Expr& e, int n = 1) {
  Expr r = e;
  for (int k = 0; k < n; ++k) r = differentiate(r, "s");
  return r;
}

constexpr double kGuard = 1e-4;

// Coefficients of the gauge ODE as functions of s.
class GaugeCoefficients {
 public:
  explicit GaugeCoefficients(const PpWaveFamily& f) {
    const Expr &rp = f.rp, &tp = f.tp, &w = f.w;
    const Expr r2 = ds(f.r, 2), t2 = ds(f.t, 2), r3 = ds(f.r, 3), t3 = ds(f.t, 3);
    const Expr damping = ds(rp * tp) / w;
    const Expr forcing = sum({Expr(2) * (r3 * tp + t3 * rp) * w, Expr(2) * r2 * t2, product({Expr(4), rp, tp, r2, t2}),
                              product({Expr(3), pow(tp, 2), pow(r2, 2)}), product({Expr(3), pow(rp, 2), pow(t2, 2)})}) /
                         (Expr(8) * pow(w, 2));
    tape_ = std::make_shared<Tape>(std::vector<Expr>{w, damping, forcing}, std::vector<std::string>{"s"});
  }

  // h'' at (s, h'); throws when the guard fails.
  double operator()(double s, double hp) const {
    std::vector<double> out;
    const auto st = tape_->run(std::vector<double>{s}, out);
    if (!st.ok || std::abs(out[0]) <= kGuard) throw GaugeError("1 - r't' vanishes near s = " + std::to_string(s));
    return hp * hp - out[1] * hp + out[2];
  }

 private:
  std::shared_ptr<const Tape> tape_;
};

double hermite(double x0, double x1, double y0, double y1, double d0, double d1, double x) {
  const double h = x1 - x0;
  const double t = (x - x0) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * d1;
}

}  // namespace

PpWaveFamily PpWaveFamily::make(const Expr& r, const Expr& t, Interval range) {
  for (const auto& v : free_variables(std::vector<Expr>{r, t})) {
    if (v != "s") throw std::invalid_argument("r and t may only depend on s; got '" + v + "'");
  }
  if (!(range.lo < range.hi)) throw std::invalid_argument("empty s-interval");
  PpWaveFamily f;
  f.r = r;
  f.t = t;
  f.range = range;
  f.rp = ds(r);
  f.tp = ds(t);
  f.w = Expr(1) - f.rp * f.tp;
  const Tape tape({f.w}, {"s"});
  std::vector<double> out;
  for (int k = 0; k <= 400; ++k) {
    const double s = range.lo + (range.hi - range.lo) * k / 400.0;
    const auto st = tape.run(std::vector<double>{s}, out);
    if (!st.ok || std::abs(out[0]) <= kGuard) {
      throw std::invalid_argument("|1 - r't'| <= 1e-4 at s = " + std::to_string(s));
    }
  }
  return f;
}

std::pair<Expr, Expr> z_invariants(const PpWaveFamily& f) {
  const Expr d_rt = ds(f.rp * f.tp);
  const Expr den = Expr(4) * pow(f.w, 2);
  auto z = [&](const Expr& u) { return (Expr(-2) * f.w * ds(u, 3) - Expr(3) * ds(u, 2) * d_rt) / den; };
  return {z(f.r), z(f.t)};
}

std::pair<Expr, Expr> conformal_flatness_residuals(const PpWaveFamily& f) {
  const Expr d_rt = ds(f.rp * f.tp);
  auto res = [&](const Expr& u) { return ds(u, 3) + Expr(3) * ds(u, 2) * d_rt / (Expr(2) * f.w); };
  return {res(f.r), res(f.t)};
}

std::array<double, 3> GaugeSolution::at(double x) const {
  if (s.size() < 2 || x < s.front() || x > s.back()) {
    throw GaugeError("s = " + std::to_string(x) + " is outside the gauge grid");
  }
  std::size_t i = static_cast<std::size_t>(std::upper_bound(s.begin(), s.end(), x) - s.begin());
  i = std::clamp<std::size_t>(i, 1, s.size() - 1) - 1;
  const double hv = hermite(s[i], s[i + 1], h[i], h[i + 1], hp[i], hp[i + 1], x);
  const double hpv = hermite(s[i], s[i + 1], hp[i], hp[i + 1], hpp[i], hpp[i + 1], x);
  return {hv, hpv, rhs(x, hpv)};
}

GaugeSolution ricci_flat_gauge(const PpWaveFamily& f, double s0, double h0, double hp0, Interval range,
                               double step) {
  if (!(step > 0)) throw std::invalid_argument("step must be positive");
  if (!(range.lo <= s0 && s0 <= range.hi)) throw std::invalid_argument("s0 outside the range");
  const GaugeCoefficients rhs(f);
  GaugeSolution g;
  g.step = step;
  g.s0 = s0;
  g.h0 = h0;
  g.hp0 = hp0;
  g.rhs = rhs;

  // One direction at a time; dir = +1 or -1. The last step is shortened to
  // land on the range end.
  auto sweep = [&](double end, int dir) {
    std::vector<std::array<double, 3>> nodes;  // (s, h, h')
    double s = s0, h = h0, hp = hp0;
    nodes.push_back({s, h, hp});
    while (dir * (end - s) > 1e-14) {
      const double dt = dir * std::min(step, dir * (end - s));
      auto F = [&](double ss, double hh, double pp) { return std::array<double, 2>{pp, rhs(ss, pp)}; (void)hh; };
      const auto k1 = F(s, h, hp);
      const auto k2 = F(s + dt / 2, h + dt / 2 * k1[0], hp + dt / 2 * k1[1]);
      const auto k3 = F(s + dt / 2, h + dt / 2 * k2[0], hp + dt / 2 * k2[1]);
      const auto k4 = F(s + dt, h + dt * k3[0], hp + dt * k3[1]);
      h += dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
      hp += dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
      s += dt;
      if (!std::isfinite(hp) || std::abs(hp) > 1e8) {
        throw GaugeError("gauge blows up (|h'| > 1e8) near s = " + std::to_string(s));
      }
      nodes.push_back({s, h, hp});
    }
    return nodes;
  };
  auto back = sweep(range.lo, -1);
  const auto fwd = sweep(range.hi, +1);
  std::reverse(back.begin(), back.end());
  back.insert(back.end(), fwd.begin() + 1, fwd.end());
  for (const auto& [s, h, hp] : back) {
    g.s.push_back(s);
    g.h.push_back(h);
    g.hp.push_back(hp);
    g.hpp.push_back(rhs(s, hp));
  }
  return g;
}

Metric4 ppwave_metric(const PpWaveFamily& f, const GaugeSolution* gauge) {
  SymmetricTensor g(Chart({"z", "p", "q", "s"}));
  g.set(0, 3, f.w);
  g.set(1, 1, f.tp);
  g.set(1, 2, Expr(-1));
  g.set(2, 2, f.rp);
  Metric4 m(g);
  if (!gauge) return m;
  const GaugeSolution sol = *gauge;
  return conformal_rescale(m, [sol](const EvalPoint& pt) {
    const auto v = sol.at(pt.at("s"));
    ScalarJet j;
    j.value = v[0];
    j.d[3] = v[1];
    j.dd[3][3] = v[2];
    return j;
  });
}

Report verify_ppwave(const PpWaveFamily& f, const GaugeSolution* gauge, const PpWaveOptions& opt) {
  const CurvatureReport curv(ppwave_metric(f, gauge));
  const auto [Z1, Z2] = z_invariants(f);
  const Tape ztape({Z1, Z2}, {"s"});
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> us(f.range.lo, f.range.hi), u(-1.0, 1.0);
  if (gauge) us = std::uniform_real_distribution<double>(std::max(f.range.lo, gauge->s.front()),
                                                         std::min(f.range.hi, gauge->s.back()));

  double ricci = 0, weyl = 0, quad_rel = 0, quad_abs = 0, nabla = 0, zmax = 0;
  std::optional<EvalPoint> ricci_w, nabla_w;
  // Pattern: C^p_sqs against Z1 and C^q_sps against Z2, one common constant.
  std::vector<std::array<double, 2>> pairs;  // (C, Z)
  Report r;
  r.title = "pp-wave";
  std::vector<double> zv;
  for (int k = 0; k < opt.samples; ++k) {
    EvalPoint pt = {{"z", u(rng)}, {"p", u(rng)}, {"q", u(rng)}, {"s", us(rng)}};
    const auto T = curv.at(pt);
    const auto st = ztape.run(std::vector<double>{pt["s"]}, zv);
    if (!st.ok) throw EvalError("Z invariants failed to evaluate");
    r.add_value("Z1(s=" + std::to_string(pt["s"]) + ")", zv[0]);
    r.add_value("Z2(s=" + std::to_string(pt["s"]) + ")", zv[1]);
    zmax = std::max({zmax, std::abs(zv[0]), std::abs(zv[1])});
    pairs.push_back({T.weyl[idx4(1, 3, 2, 3)], zv[0]});
    pairs.push_back({T.weyl[idx4(2, 3, 1, 3)], zv[1]});
    const double cmax = max_abs(T.weyl_down);
    weyl = std::max(weyl, max_abs(T.weyl));
    quad_abs = std::max(quad_abs, std::abs(T.weyl_square));
    if (cmax > 0) quad_rel = std::max(quad_rel, std::abs(T.weyl_square) / (cmax * cmax));
    const double ric = max_abs(T.ricci);
    if (ric >= ricci) {
      ricci = ric;
      ricci_w = pt;
    }
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j) {
        if (std::abs(T.gamma[idx3(i, j, 0)]) >= nabla) {
          nabla = std::abs(T.gamma[idx3(i, j, 0)]);
          nabla_w = pt;
        }
      }
    }
  }

  if (zmax > 1e-12) {
    double cz = 0, zz = 0;
    for (const auto& [c, z] : pairs) {
      cz += c * z;
      zz += z * z;
    }
    const double fit = cz / zz;
    double worst = 0;
    for (const auto& [c, z] : pairs) worst = std::max(worst, std::abs(c - fit * z));
    r.add_value("weyl_fit_constant", fit);
    r.add(bound_check("Weyl pattern vs Z1, Z2", worst / zmax, opt.weyl_rel_tol));
    r.add(bound_check("Weyl fit constant is +-1", std::abs(std::abs(fit) - 1.0), opt.weyl_rel_tol));
    r.add(bound_check("quadratic Weyl invariant", quad_rel, opt.quadratic_tol));
  } else {
    r.add(bound_check("Weyl vanishes with Z1, Z2", weyl, opt.flat_tol));
    r.add(bound_check("quadratic Weyl invariant", quad_abs, opt.quadratic_tol));
  }
  r.add_value("weyl_max", weyl);
  r.add_value("ricci_max", ricci);
  if (gauge) r.add(bound_check("Ricci", ricci, opt.ricci_tol, ricci_w));
  r.add(bound_check("nabla d/dz", nabla, opt.parallel_tol, nabla_w));
  for (auto& c : r.checks) {
    if (c.verdict == Verdict::Pass) c.witness.reset();
  }
  return r;
}

}  // namespace paracr
