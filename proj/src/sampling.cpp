#include "paracr/sampling.hpp"

#include <cmath>
#include <random>

#include "paracr/tape.hpp"

namespace paracr {

void SampleDomain::validate() const {
  if (samples < 1) throw std::invalid_argument("sample count must be positive");
  if (!(guard_floor > 0.0)) throw std::invalid_argument("guard floor must be positive");
  if (!(derived_floor >= 0.0)) throw std::invalid_argument("derived guard floor must be non-negative");
  for (const auto& [name, iv] : intervals) {
    if (!(iv.lo <= iv.hi) || !std::isfinite(iv.lo) || !std::isfinite(iv.hi)) {
      throw std::invalid_argument("empty or non-finite interval for '" + name + "'");
    }
  }
}

SampleSet draw_samples(const std::vector<Expr>& exprs, const SampleDomain& dom) {
  dom.validate();
  std::vector<Expr> guards = dom.guards;
  const std::size_t first_derived = exprs.size() + guards.size();
  const double derived_floor = dom.derived_floor > 0.0 ? dom.derived_floor : dom.guard_floor;
  for (const auto& e : exprs) {
    for (auto& g : singular_guards(e)) guards.push_back(std::move(g));
  }

  std::vector<std::string> names;
  for (const auto& [name, iv] : dom.intervals) names.push_back(name);
  std::vector<Expr> all = exprs;
  all.insert(all.end(), guards.begin(), guards.end());
  for (const auto& v : free_variables(all)) {
    if (!dom.intervals.count(v)) throw std::invalid_argument("no sampling interval for variable '" + v + "'");
  }
  const Tape tape(all, names);

  std::mt19937_64 rng(dom.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SampleSet out;
  std::vector<double> in(names.size());
  std::vector<double> vals;
  const int budget = 2 * dom.samples;
  for (int attempt = 0; attempt < budget && static_cast<int>(out.accepted.size()) < dom.samples; ++attempt) {
    std::size_t k = 0;
    for (const auto& [name, iv] : dom.intervals) in[k++] = iv.lo + (iv.hi - iv.lo) * unit(rng);
    const auto st = tape.run(in, vals);
    bool ok = st.ok && st.max_abs <= dom.scale_bound;
    for (std::size_t g = exprs.size(); ok && g < vals.size(); ++g) {
      ok = std::abs(vals[g]) > (g < first_derived ? dom.guard_floor : derived_floor);
    }
    if (!ok) {
      ++out.rejected;
      continue;
    }
    Sample s;
    for (std::size_t i = 0; i < names.size(); ++i) s.point.emplace(names[i], in[i]);
    s.values.assign(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(exprs.size()));
    out.accepted.push_back(std::move(s));
  }
  return out;
}

ZeroTest all_identically_zero(const std::vector<Expr>& es, const SampleDomain& dom) {
  ZeroTest r;
  r.tol = dom.tol_zero;
  bool all_exact_zero = true;
  for (const auto& e : es) all_exact_zero = all_exact_zero && e.is_zero();
  if (all_exact_zero) {
    r.verdict = ZeroVerdict::Zero;
    return r;
  }
  for (const auto& e : es) {
    if (e.is_constant() && !e.is_zero()) {
      // A nonzero constant is nonzero everywhere; any point of the box is a witness.
      r.verdict = ZeroVerdict::Nonzero;
      r.max_abs = std::abs(e.value().to_double());
      EvalPoint w;
      for (const auto& [name, iv] : dom.intervals) w.emplace(name, iv.lo);
      r.witness = w;
      return r;
    }
  }
  const SampleSet set = draw_samples(es, dom);
  r.accepted = static_cast<int>(set.accepted.size());
  r.rejected = set.rejected;
  double worst = -1.0;
  for (const auto& s : set.accepted) {
    for (double v : s.values) {
      const double a = std::abs(v);
      r.max_abs = std::max(r.max_abs, a);
      if (a >= dom.tol_zero && a > worst) {
        worst = a;
        r.witness = s.point;
      }
    }
  }
  if (r.witness) {
    r.verdict = ZeroVerdict::Nonzero;
  } else if (set.inconclusive() || r.accepted < dom.samples) {
    r.verdict = ZeroVerdict::Inconclusive;
  } else {
    r.verdict = ZeroVerdict::Zero;
  }
  return r;
}

ZeroTest is_identically_zero(const Expr& e, const SampleDomain& dom) { return all_identically_zero({e}, dom); }

std::string verdict_name(ZeroVerdict v) {
  switch (v) {
    case ZeroVerdict::Zero:
      return "zero";
    case ZeroVerdict::Nonzero:
      return "nonzero";
    case ZeroVerdict::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

}  // namespace paracr
