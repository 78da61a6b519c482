#pragma once

#include <array>
#include <memory>
#include <optional>

#include "paracr/metric.hpp"

namespace paracr {

/// Curvature tensors with scalar type S (double or Expr), flattened
/// row-major. Conventions:
///   Gamma^i_jk = 1/2 g^il (d_j g_lk + d_k g_lj - d_l g_jk)
///   R^i_jkl    = d_k Gamma^i_lj - d_l Gamma^i_kj + Gamma^i_km Gamma^m_lj - Gamma^i_lm Gamma^m_kj
///   Ric_jl     = R^i_jil,   scal = g^jl Ric_jl,   R_ijkl = g_im R^m_jkl
///   C_abcd     = R_abcd - 1/2 (g_ac Ric_bd - g_ad Ric_bc - g_bc Ric_ad + g_bd Ric_ac)
///                + scal/6 (g_ac g_bd - g_ad g_bc)
template <class S>
struct CurvatureTensors {
  std::array<S, 16> g{}, ginv{};
  std::array<S, 64> gamma{};    // [i][j][k]
  std::array<S, 256> riemann{}; // R^i_jkl
  std::array<S, 256> riemann_down{};
  std::array<S, 16> ricci{};
  S scalar{};
  std::array<S, 256> weyl{};  // C^i_jkl
  std::array<S, 256> weyl_down{};
  S weyl_square{};  // C_abcd C^abcd
};

using CurvatureValues = CurvatureTensors<double>;

constexpr std::size_t idx2(std::size_t i, std::size_t j) { return 4 * i + j; }
constexpr std::size_t idx3(std::size_t i, std::size_t j, std::size_t k) { return 16 * i + 4 * j + k; }
constexpr std::size_t idx4(std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
  return 64 * i + 16 * j + 4 * k + l;
}

struct CurvatureOptions {
  /// Node budget for the symbolic pipeline; beyond it curvature is computed
  /// numerically from the symbolic 2-jet of g at each point.
  std::size_t node_budget = 200000;
  bool force_numeric = false;
};

/// Levi-Civita curvature of a 4-metric, symbolic when affordable.
class CurvatureReport {
 public:
  CurvatureReport(const Metric4& g, const CurvatureOptions& opt = {});
  ~CurvatureReport();
  CurvatureReport(CurvatureReport&&) noexcept;
  CurvatureReport& operator=(CurvatureReport&&) noexcept;

  [[nodiscard]] bool symbolic() const { return symbolic_.has_value(); }
  /// Only when symbolic().
  [[nodiscard]] const CurvatureTensors<Expr>& expressions() const { return *symbolic_; }
  [[nodiscard]] const Metric4& metric() const { return metric_; }

  /// All tensors at a point. Throws EvalError on a singular point.
  [[nodiscard]] CurvatureValues at(const EvalPoint& pt) const;

 private:
  struct Impl;
  Metric4 metric_;
  std::optional<CurvatureTensors<Expr>> symbolic_;
  std::unique_ptr<Impl> impl_;
};

inline CurvatureReport curvature_tensors(const Metric4& g, const CurvatureOptions& opt = {}) {
  return CurvatureReport(g, opt);
}

/// Numeric curvature from g, d_k g and d_k d_l g at a point.
CurvatureValues curvature_from_jet(const std::array<double, 16>& g, const std::array<std::array<double, 16>, 4>& dg,
                                   const std::array<std::array<std::array<double, 16>, 4>, 4>& ddg);

/// Index symmetries, first Bianchi, Ricci symmetry and Weyl trace-freeness
/// at the sampled points.
Report curvature_identity_checks(const CurvatureReport& c, const std::vector<EvalPoint>& pts, double tol = 1e-7);

/// Every Christoffel symbol against central differences of g (relative).
double christoffel_fd_residual(const CurvatureReport& c, const EvalPoint& pt, double step = 1e-5);

/// Number of positive and negative eigenvalues of g at pt.
std::pair<int, int> signature(const Metric4& g, const EvalPoint& pt);

double max_abs(const std::array<double, 256>& t);
double max_abs(const std::array<double, 16>& t);
double max_abs(const std::array<double, 64>& t);

}  // namespace paracr
