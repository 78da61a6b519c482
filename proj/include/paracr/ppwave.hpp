#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "paracr/curvature.hpp"
#include "paracr/jet.hpp"
#include "paracr/report.hpp"

namespace paracr {

/// R = r(s), T = t(s) with |1 - r' t'| > 1e-4 on the s-interval.
struct PpWaveFamily {
  Expr r, t;
  Interval range{-0.4, 0.4};
  Expr rp, tp, w;  // r', t', 1 - r' t'

  static PpWaveFamily make(const Expr& r, const Expr& t, Interval range = {-0.4, 0.4});
  [[nodiscard]] PdePair pair() const { return PdePair::make(r, t); }
};

/// The pair of relative invariants whose vanishing is conformal flatness.
std::pair<Expr, Expr> z_invariants(const PpWaveFamily& f);

/// r''' + 3 r'' (r't')' / (2 (1 - r't')) and the same with t.
std::pair<Expr, Expr> conformal_flatness_residuals(const PpWaveFamily& f);

class GaugeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// h(s) on a uniform grid, with h' and (from the ODE) h''.
struct GaugeSolution {
  std::vector<double> s, h, hp, hpp;  // increasing s
  double step = 0.0;
  double s0 = 0.0, h0 = 0.0, hp0 = 0.0;
  std::function<double(double, double)> rhs;  // h'' = rhs(s, h')

  /// h, h', h'' at s: h and h' by cubic Hermite interpolation of (h, h')
  /// and (h', h''); h'' then from the ODE. Throws GaugeError outside the grid.
  [[nodiscard]] std::array<double, 3> at(double s) const;
};

/// Integrates the Ricci-flat gauge ODE
///   h'' = h'^2 - ((r't')'/(1 - r't')) h' + forcing(s)
/// with classical RK4 from s0 in both directions over range.
GaugeSolution ricci_flat_gauge(const PpWaveFamily& f, double s0, double h0, double hp0, Interval range,
                               double step);

/// e^{2h} (2 (1 - r't') dz ds + t' dp^2 - 2 dp dq + r' dq^2) on (z, p, q, s);
/// without a gauge h = 0.
Metric4 ppwave_metric(const PpWaveFamily& f, const GaugeSolution* gauge = nullptr);

struct PpWaveOptions {
  int samples = 20;
  std::uint64_t seed = 42;
  double weyl_rel_tol = 1e-6;
  double quadratic_tol = 1e-7;  // relative to max|C|^2
  double flat_tol = 1e-7;       // Weyl when Z1 = Z2 = 0
  double ricci_tol = 1e-6;
  double parallel_tol = 1e-6;
};

/// Ricci, the Weyl pattern against (Z1, Z2), the quadratic Weyl invariant
/// and nabla(d/dz) at sample points of the range. Ricci is a check only
/// with a gauge; otherwise its norm is reported as a value.
Report verify_ppwave(const PpWaveFamily& f, const GaugeSolution* gauge, const PpWaveOptions& opt = {});

}  // namespace paracr
