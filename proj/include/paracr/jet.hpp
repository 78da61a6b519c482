#pragma once

#include <array>
#include <stdexcept>

#include "paracr/expr.hpp"
#include "paracr/forms.hpp"
#include "paracr/report.hpp"
#include "paracr/sampling.hpp"

namespace paracr {

/// (x, y, z, p, q, s) = (x, y, z, z_x, z_y, z_xy).
const Chart& jet_chart();

/// Thrown when 1 - R_s T_s vanishes identically.
class DegeneratePair : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The system z_xx = R, z_yy = T with R, T functions on the jet chart.
struct PdePair {
  Expr R;
  Expr T;
  Expr Rs;
  Expr Ts;
  Expr one_minus_RsTs;
  Expr four_minus_RsTs;
  Expr RsTs;

  /// Validates the variables and rejects pairs with 1 - R_s T_s == 0.
  static PdePair make(const Expr& R, const Expr& T);
  static PdePair parse(std::string_view R, std::string_view T) { return make(parse_expr(R), parse_expr(T)); }
};

/// D_x and D_y solved explicitly. Components are in jet_chart() order.
struct TotalDerivatives {
  Expr DxT;
  Expr DyR;
  std::array<Expr, 6> Dx;
  std::array<Expr, 6> Dy;
};

TotalDerivatives total_derivative_fields(const PdePair& pp);

/// D_x f (which == 'x') or D_y f (which == 'y').
Expr apply_total(const TotalDerivatives& td, char which, const Expr& f);

/// D_x^2 T - D_y^2 R.
Expr integrability_residual(const PdePair& pp);
Expr integrability_residual(const PdePair& pp, const TotalDerivatives& td);

/// [D_x, D_y] has vanishing x, y, z, p, q components and s component equal
/// to the integrability residual.
Report commutator_residual(const PdePair& pp, const SampleDomain& dom);

/// DxT and DyR satisfy their defining linear relations.
Report defining_relations_check(const PdePair& pp, const SampleDomain& dom);

/// Metricity polynomials; their simultaneous vanishing is point and contact invariant.
std::pair<Expr, Expr> point_metricity_invariants(const PdePair& pp);
std::pair<Expr, Expr> point_metricity_invariants(const PdePair& pp, const TotalDerivatives& td);

/// Torsion obstructions for point equivalence (upper sign of the square root).
std::pair<Expr, Expr> torsion_obstructions(const PdePair& pp);

/// Contact-invariant Weyl obstructions.
std::pair<Expr, Expr> contact_weyl_invariants(const PdePair& pp);

/// z = psi(x, y, a0..a3) solves the pair: max |psi_xx - R| and |psi_yy - T|.
Report check_solution_pde(const PdePair& pp, const Expr& psi, const SampleDomain& dom, double tol = 1e-8);

/// The discrete swap (x<->y, p<->q) applied to an expression.
Expr swap_xy(const Expr& e);
/// The pair with R and T exchanged under the swap.
PdePair swap_pair(const PdePair& pp);

/// Box [lo, hi]^6 on the jet chart, guarded by |1 - R_s T_s|.
SampleDomain jet_domain(const PdePair& pp, double lo, double hi, int samples = 20, std::uint64_t seed = 42);

}  // namespace paracr
