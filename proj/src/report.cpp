#include "paracr/report.hpp"

#include <cmath>

namespace paracr {

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Pass:
      return "pass";
    case Verdict::Fail:
      return "fail";
    case Verdict::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

void Report::append(const Report& other, const std::string& prefix) {
  const std::string p = prefix.empty() ? "" : prefix + "/";
  for (auto c : other.checks) {
    c.name = p + c.name;
    checks.push_back(std::move(c));
  }
  for (const auto& [n, v] : other.values) values.emplace_back(p + n, v);
}

Verdict Report::overall() const {
  bool inconclusive = false;
  for (const auto& c : checks) {
    if (c.verdict == Verdict::Fail) return Verdict::Fail;
    inconclusive = inconclusive || c.verdict == Verdict::Inconclusive;
  }
  return inconclusive ? Verdict::Inconclusive : Verdict::Pass;
}

const Check* Report::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

Check zero_check(std::string name, const ZeroTest& z) {
  Check c;
  c.name = std::move(name);
  c.residual = z.max_abs;
  c.tolerance = z.tol;
  c.witness = z.witness;
  switch (z.verdict) {
    case ZeroVerdict::Zero:
      c.verdict = Verdict::Pass;
      break;
    case ZeroVerdict::Nonzero:
      c.verdict = Verdict::Fail;
      break;
    case ZeroVerdict::Inconclusive:
      c.verdict = Verdict::Inconclusive;
      c.detail = "too many guard rejections (" + std::to_string(z.rejected) + ")";
      break;
  }
  return c;
}

Check nonzero_check(std::string name, const ZeroTest& z) {
  Check c = zero_check(std::move(name), z);
  if (z.verdict == ZeroVerdict::Zero) c.verdict = Verdict::Fail;
  if (z.verdict == ZeroVerdict::Nonzero) c.verdict = Verdict::Pass;
  return c;
}

Check bound_check(std::string name, double residual, double tol, std::optional<EvalPoint> witness) {
  Check c;
  c.name = std::move(name);
  c.residual = residual;
  c.tolerance = tol;
  c.verdict = (std::isfinite(residual) && residual < tol) ? Verdict::Pass : Verdict::Fail;
  c.witness = std::move(witness);
  return c;
}

}  // namespace paracr
