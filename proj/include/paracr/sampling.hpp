#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "paracr/expr.hpp"

namespace paracr {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Where and how densely semantic checks sample.
struct SampleDomain {
  std::map<std::string, Interval, std::less<>> intervals;
  int samples = 20;
  std::uint64_t seed = 42;
  /// Expressions that must satisfy |g| > guard_floor at an accepted point.
  std::vector<Expr> guards;
  double guard_floor = 1e-4;
  /// Floor for the guards derived from the expressions themselves
  /// (denominators, log/sqrt arguments); 0 means guard_floor.
  double derived_floor = 0.0;
  /// Points where any subterm exceeds this magnitude are redrawn.
  double scale_bound = 1e6;
  double tol_zero = 1e-9;

  void validate() const;
  SampleDomain& set(const std::string& name, double lo, double hi) {
    intervals[name] = {lo, hi};
    return *this;
  }
  SampleDomain& guard(const Expr& g) {
    guards.push_back(g);
    return *this;
  }
};

struct Sample {
  EvalPoint point;
  std::vector<double> values;
};

/// Guarded pseudo-random sampling of a batch of expressions. At most
/// 2*samples candidates are drawn; a candidate is rejected when a guard (the
/// domain's, plus every denominator/log/sqrt argument of the expressions) is
/// too small, evaluation fails, or some subterm exceeds the scale bound.
struct SampleSet {
  std::vector<Sample> accepted;
  int rejected = 0;
  [[nodiscard]] bool inconclusive() const { return accepted.empty() || rejected > static_cast<int>(accepted.size()); }
};

SampleSet draw_samples(const std::vector<Expr>& exprs, const SampleDomain& dom);

enum class ZeroVerdict { Zero, Nonzero, Inconclusive };

struct ZeroTest {
  ZeroVerdict verdict = ZeroVerdict::Inconclusive;
  double max_abs = 0.0;
  double tol = 0.0;
  std::optional<EvalPoint> witness;
  int accepted = 0;
  int rejected = 0;
};

/// Probabilistic identity test: "zero" iff every accepted sample satisfies
/// |e| < tol_zero; any accepted sample above tolerance is a witness.
ZeroTest is_identically_zero(const Expr& e, const SampleDomain& dom);
/// Joint test of a family; the witness belongs to the worst expression.
ZeroTest all_identically_zero(const std::vector<Expr>& es, const SampleDomain& dom);

std::string verdict_name(ZeroVerdict v);

}  // namespace paracr
