#pragma once

#include <array>

#include "paracr/curvature.hpp"
#include "paracr/forms.hpp"
#include "paracr/jet.hpp"
#include "paracr/report.hpp"

namespace paracr {

/// Chart (x, y, a0, a1, a2, a3, a, f11, f22, f31, f32) of the 11-dimensional
/// bundle over the solution space of z_xx = z_yy = 0.
const Chart& flat_bundle_chart();

/// Coframe of the flat (1,2,3) model: theta1..theta4, Omega1..Omega6, A.
struct FlatCoframe {
  std::array<DiffForm, 11> forms;

  [[nodiscard]] const DiffForm& theta(int i) const { return forms.at(static_cast<std::size_t>(i - 1)); }
  [[nodiscard]] const DiffForm& omega(int i) const { return forms.at(static_cast<std::size_t>(i + 3)); }
  [[nodiscard]] const DiffForm& A() const { return forms[10]; }
  static const std::array<const char*, 11>& names();
};

FlatCoframe flat_coframe();

/// Domain on the bundle chart with |a|, |f11|, |f22| bounded below by
/// guard_floor; derived denominator guards use 1e-4.
SampleDomain flat_bundle_domain(int samples = 30, std::uint64_t seed = 42, double guard_floor = 0.1);

/// One check per structure equation (d theta^i, d Omega_mu, dA), each
/// zero-testing every coefficient of LHS - RHS.
Report verify_structure_equations(const FlatCoframe& c, const SampleDomain& dom);
inline Report verify_flat_structure_equations(const SampleDomain& dom) {
  return verify_structure_equations(flat_coframe(), dom);
}

/// 2(theta1 theta2 + theta3 theta4) + 2 f11 f22 (da0 da3 - da1 da2), which
/// vanishes identically.
SymmetricTensor flat_metric_defect(const FlatCoframe& c);

struct Tangency {
  bool tangent = false;
  std::optional<std::pair<double, double>> point;  // (x*, y*) when unique
  /// |da0 da3 - da1 da2| / |da|^2 on the generic branch; the distance from
  /// the decision boundary in the degenerate ones.
  double margin = 0.0;
};

/// Whether the solutions a and a + da of z_xx = z_yy = 0 (planes
/// z = a0 + a1 x + a2 y + a3 xy) touch to first order.
Tangency newman_tangency(const std::array<double, 4>& a, const std::array<double, 4>& da, double tol);

struct SiFamily {
  PdePair pair;
  Expr psi;     // general solution over (x, y, a0, a1, a2, a3)
  Metric4 g;    // constant-curvature metric on (a0, a1, a2, a3)
  Expr kappa;
};

SiFamily si_family(const Expr& kappa);
SiFamily si_family(double kappa);

/// Jet-chart domain for the si pair, away from y = 0 and z + x p - y q = 0.
SampleDomain si_jet_domain(const PdePair& pp, int samples = 20, std::uint64_t seed = 42);
/// Domain on (x, y, a0..a3) for checking psi, guarded by a2 y - a1 x.
SampleDomain si_solution_domain(int samples = 50, std::uint64_t seed = 42);
/// Domain on (a0..a3) for g_kappa, guarded by its conformal denominator.
SampleDomain si_metric_domain(const SiFamily& f, int samples = 50, std::uint64_t seed = 42);

}  // namespace paracr
