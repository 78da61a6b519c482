#pragma once

#include <functional>
#include <stdexcept>

#include "paracr/report.hpp"
#include "paracr/sampling.hpp"

namespace paracr {

/// lambda = dy - p(x,y,a1,a2) dx; requires dp/da1 not identically zero.
struct ParaCrDatum112 {
  Expr p;
  static ParaCrDatum112 make(const Expr& p);
};

/// lambda = dy - p(x,y,a1) dx; requires dp/da1 not identically zero.
struct ParaCrDatum111 {
  Expr p;
  static ParaCrDatum111 make(const Expr& p);
};

struct JetPoint3 {
  double x = 0, y = 0, y1 = 0, y2 = 0;
};

enum class Branch { Generic, Degenerate, Mixed };
std::string branch_name(Branch b);

struct InvariantI {
  Expr I;
  Branch branch = Branch::Mixed;
  ZeroTest test;
  double min_abs = 0.0;  // smallest |I| over accepted samples
};

/// I = p_1 (p_x2 + p p_y2) - p_2 (p_x1 + p p_y1). Generic when |I| stays above
/// the guard floor with one sign at every sample, degenerate when I vanishes
/// identically, mixed otherwise.
InvariantI invariant_I(const ParaCrDatum112& d, const SampleDomain& dom);

/// Default sample domain on (x, y, a1, a2).
SampleDomain ode_domain(double lo, double hi, int samples = 20, std::uint64_t seed = 42);

class ReductionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ReduceOptions {
  double a1_seed = 0.0;
  Interval a1_bracket{-1e3, 1e3};
  Interval a2_bracket{-1e3, 1e3};
  double tol = 1e-12;
  int max_iter = 200;
  double singular = 1e-8;
};

/// The jet of y' = p along the solution through pt, with (a1, a2) held fixed.
struct ThirdOrderODE {
  Expr p;
  Expr q;  // y'' = p_x + p p_y
  Expr F;  // y''' = (d_x + p d_y) q
  Expr p1, p2, q1, q2;
};
ThirdOrderODE third_order_system(const ParaCrDatum112& d);

struct Reduction {
  double F = 0.0;
  double a1 = 0.0, a2 = 0.0;
  int iterations = 0;
};

/// Right-hand side of y''' = F at pt: solves y1 = p for a1 and y2 = q for a2
/// (safeguarded Newton, bisection when bracketed) and evaluates F there.
Reduction reduce_to_third_order(const ParaCrDatum112& d, const JetPoint3& pt, double a2_seed,
                                const ReduceOptions& opt = {});
Reduction reduce_to_third_order(const ThirdOrderODE& sys, const JetPoint3& pt, double a2_seed,
                                const ReduceOptions& opt = {});

/// Numerators of the two relative invariants of a (1,1,1) structure, i.e.
/// the invariants J, K with the gauge prefactors 6 f h11^3 p1^4 and
/// 6 f^3 h11 p1^4 cleared. Only their vanishing is meaningful.
std::pair<Expr, Expr> second_order_invariants(const ParaCrDatum111& d);

/// psi_xxx - F(x, psi, psi_x, psi_xx) over dom; F is over (x, y, y1, y2) and
/// psi over (x, a0, a1, a2).
Report check_solution_ode(const Expr& F, const Expr& psi, const SampleDomain& dom, double tol = 1e-8);

/// Root of f on [lo, hi] from x0. Newton steps that leave the current bracket
/// (or fail to shrink |f|) are replaced by bisection once a sign change is known.
double safeguarded_newton(const std::function<std::pair<double, double>(double)>& f, double x0, Interval bracket,
                          double tol, int max_iter, int* iterations = nullptr);

}  // namespace paracr
