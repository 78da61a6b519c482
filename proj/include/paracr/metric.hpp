#pragma once

#include <array>
#include <functional>

#include "paracr/forms.hpp"
#include "paracr/jet.hpp"
#include "paracr/report.hpp"

namespace paracr {

enum class MetricKind { Mne1, Mne2 };

std::string metric_kind_name(MetricKind k);

/// Contact forms on the jet chart.
struct ContactForms {
  DiffForm lambda, nu1, nu2, nu3;
};
ContactForms contact_forms(const PdePair& pp, const TotalDerivatives& td);

/// A bilinear form on the jet chart, degenerate along D_x and D_y, whose
/// conformal class descends to the solution space.
struct DegenerateMetric {
  MetricKind kind = MetricKind::Mne1;
  SymmetricTensor g;
  DiffForm omega;  // the 1-form paired with lambda
  Expr v;          // lambda coefficient of omega before normalisation (v, or v')
  Expr alpha_x;    // L_{D_x} g = alpha_x g
  Expr alpha_y;
};

/// mne1 needs R_s T_s != 4, mne2 needs R_s T_s != 0; throws std::domain_error
/// when the guard vanishes identically.
DegenerateMetric build_metric(const PdePair& pp, MetricKind kind);

/// (L_X g)_ij = X^k d_k g_ij + g_kj d_i X^k + g_ik d_j X^k.
SymmetricTensor lie_derivative(const SymmetricTensor& g, const std::vector<Expr>& X);

/// g(D_x, .) = g(D_y, .) = 0 and L_{D_x} g = alpha_x g, L_{D_y} g = alpha_y g.
Report degeneracy_and_descent_check(const DegenerateMetric& m, const PdePair& pp, const SampleDomain& dom);

/// Value, gradient and Hessian of a scalar at a point (chart order).
struct ScalarJet {
  double value = 0.0;
  std::array<double, 4> d{};
  std::array<std::array<double, 4>, 4> dd{};
};
using NumericFactor = std::function<ScalarJet(const EvalPoint&)>;

/// Symmetric 4x4 metric on a named chart, with the conformal factors applied
/// so far. Numeric factors (e.g. an interpolated gauge) force the numeric
/// curvature path.
class Metric4 {
 public:
  explicit Metric4(SymmetricTensor g);

  [[nodiscard]] const Chart& chart() const { return g_.chart(); }
  [[nodiscard]] const SymmetricTensor& tensor() const { return g_; }
  [[nodiscard]] const Expr& at(std::size_t i, std::size_t j) const { return g_.at(i, j); }
  [[nodiscard]] const std::vector<Expr>& history() const { return history_; }
  [[nodiscard]] const std::vector<NumericFactor>& numeric_factors() const { return numeric_; }

  friend Metric4 conformal_rescale(const Metric4& g, const Expr& phi);
  friend Metric4 conformal_rescale(const Metric4& g, NumericFactor phi);

 private:
  SymmetricTensor g_;
  std::vector<Expr> history_;
  std::vector<NumericFactor> numeric_;
};

/// g -> exp(2 phi) g.
Metric4 conformal_rescale(const Metric4& g, const Expr& phi);
Metric4 conformal_rescale(const Metric4& g, NumericFactor phi);

/// Entrywise restriction to {x = x0, y = y0}; chart (z, p, q, s).
Metric4 descend(const DegenerateMetric& m, const Expr& x0 = Expr(0), const Expr& y0 = Expr(0));

/// det g sampled over dom; fails when more than 10% of samples are singular
/// (|det| <= guard floor).
Report nondegeneracy_check(const Metric4& g, const SampleDomain& dom);

}  // namespace paracr
