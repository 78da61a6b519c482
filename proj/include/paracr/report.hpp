#pragma once

#include <optional>
#include <string>
#include <vector>

#include "paracr/expr.hpp"
#include "paracr/sampling.hpp"

namespace paracr {

enum class Verdict { Pass, Fail, Inconclusive };

std::string verdict_name(Verdict v);

struct Check {
  std::string name;
  Verdict verdict = Verdict::Fail;
  double residual = 0.0;
  double tolerance = 0.0;
  std::optional<EvalPoint> witness;
  std::string detail;
};

struct Report {
  std::string title;
  std::vector<Check> checks;
  /// Named scalar values (invariants at sample points, fitted constants, ...).
  std::vector<std::pair<std::string, double>> values;

  Check& add(Check c) {
    checks.push_back(std::move(c));
    return checks.back();
  }
  void add_value(std::string name, double v) { values.emplace_back(std::move(name), v); }
  /// Appends another report's checks and values, prefixing names with "<prefix>/".
  void append(const Report& other, const std::string& prefix = "");

  /// Fail if any check failed, else Inconclusive if any was, else Pass.
  [[nodiscard]] Verdict overall() const;
  [[nodiscard]] bool passed() const { return overall() == Verdict::Pass; }
  [[nodiscard]] const Check* find(const std::string& name) const;
};

/// "Expression vanishes" check from a zero test.
Check zero_check(std::string name, const ZeroTest& z);
/// "Expression does not vanish" check (used for negative controls).
Check nonzero_check(std::string name, const ZeroTest& z);
/// residual < tol.
Check bound_check(std::string name, double residual, double tol, std::optional<EvalPoint> witness = std::nullopt);

}  // namespace paracr
