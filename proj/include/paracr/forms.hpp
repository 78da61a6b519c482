#pragma once

#include <map>
#include <string>
#include <vector>

#include "paracr/expr.hpp"

namespace paracr {

/// Ordered list of coordinate names.
class Chart {
 public:
  Chart() = default;
  explicit Chart(std::vector<std::string> names);

  [[nodiscard]] std::size_t size() const { return names_.size(); }
  [[nodiscard]] const std::string& name(std::size_t i) const { return names_.at(i); }
  [[nodiscard]] const std::vector<std::string>& names() const { return names_; }
  /// Index of a coordinate, or -1.
  [[nodiscard]] int index_of(std::string_view name) const;

  friend bool operator==(const Chart&, const Chart&) = default;

 private:
  std::vector<std::string> names_;
};

using Substitution = std::map<std::string, Expr, std::less<>>;

/// Exterior k-form with Expr coefficients, stored sparsely by strictly
/// increasing index tuples.
class DiffForm {
 public:
  using Key = std::vector<int>;

  DiffForm(Chart chart, int degree);

  /// The 0-form f.
  static DiffForm function(const Chart& chart, const Expr& f);
  /// The coordinate differential d(name).
  static DiffForm differential(const Chart& chart, std::string_view name);
  /// Sum of coefficient * d(name) over the given pairs.
  static DiffForm one_form(const Chart& chart, const std::vector<std::pair<std::string, Expr>>& terms);

  [[nodiscard]] const Chart& chart() const { return chart_; }
  [[nodiscard]] int degree() const { return degree_; }
  [[nodiscard]] const std::map<Key, Expr>& terms() const { return terms_; }

  /// Coefficient of dx^{i1}^...^dx^{ik}; indices must be strictly increasing.
  [[nodiscard]] Expr coeff(const Key& key) const;
  /// Coefficient addressed by coordinate names, in any order (sign applied).
  [[nodiscard]] Expr coeff(const std::vector<std::string>& names) const;
  [[nodiscard]] std::vector<Expr> coefficients() const;

  /// Adds c to the coefficient at an increasing key; zero results are erased.
  void add_term(const Key& key, const Expr& c);

  friend DiffForm operator+(const DiffForm& a, const DiffForm& b);
  friend DiffForm operator-(const DiffForm& a, const DiffForm& b);
  friend DiffForm operator-(const DiffForm& a);
  friend DiffForm operator*(const Expr& f, const DiffForm& a);

 private:
  Chart chart_;
  int degree_;
  std::map<Key, Expr> terms_;
};

DiffForm wedge(const DiffForm& a, const DiffForm& b);
DiffForm exterior_derivative(const DiffForm& a);

/// Pulls a form back to the slice where the given coordinates are fixed:
/// the values are substituted into the coefficients, then every term that
/// contains a fixed differential is dropped. The result lives on the chart of
/// the remaining coordinates (original order kept).
DiffForm restrict_to_slice(const DiffForm& a, const Substitution& fixed);

/// Largest |symbolic d(a) - central-difference d(a)| over all coefficients
/// at pt (step 1e-5). Throws EvalError when a coefficient is singular near pt.
double numeric_d_check(const DiffForm& a, const EvalPoint& pt, double step = 1e-5);

/// Symmetric covariant 2-tensor, dense n x n.
class SymmetricTensor {
 public:
  explicit SymmetricTensor(Chart chart);

  [[nodiscard]] const Chart& chart() const { return chart_; }
  [[nodiscard]] std::size_t dim() const { return chart_.size(); }
  [[nodiscard]] const Expr& at(std::size_t i, std::size_t j) const { return m_[i * dim() + j]; }
  void set(std::size_t i, std::size_t j, const Expr& e);
  [[nodiscard]] std::vector<Expr> entries() const;  // upper triangle, row-major

  friend SymmetricTensor operator+(const SymmetricTensor& a, const SymmetricTensor& b);
  friend SymmetricTensor operator-(const SymmetricTensor& a, const SymmetricTensor& b);
  friend SymmetricTensor operator*(const Expr& f, const SymmetricTensor& a);

 private:
  Chart chart_;
  std::vector<Expr> m_;
};

/// Symmetrised product a b = (a (x) b + b (x) a)/2 of two 1-forms, so that
/// 2 dz ds has dz-ds entry 1.
SymmetricTensor sym_product(const DiffForm& a, const DiffForm& b);
/// Builds sum_k c_k a_k b_k in one pass (avoids deep chains of binary sums).
SymmetricTensor sym_sum(const Chart& chart, const std::vector<std::tuple<Expr, DiffForm, DiffForm>>& terms);
/// g(v, .) for a vector field with components v^i.
DiffForm contract(const SymmetricTensor& g, const std::vector<Expr>& v);
SymmetricTensor restrict_to_slice(const SymmetricTensor& g, const Substitution& fixed);

}  // namespace paracr
