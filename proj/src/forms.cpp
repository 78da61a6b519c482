#include "paracr/forms.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

namespace paracr {

Chart::Chart(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty()) throw std::invalid_argument("chart needs at least one coordinate");
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (!seen.insert(n).second) throw std::invalid_argument("duplicate coordinate '" + n + "'");
  }
}

int Chart::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return static_cast<int>(i);
  }
  return -1;
}

namespace {

void require_same_chart(const Chart& a, const Chart& b) {
  if (!(a == b)) throw std::invalid_argument("forms live on different charts");
}

// Collects terms per key and sums each list once at the end.
class Accumulator {
 public:
  void add(const DiffForm::Key& k, Expr e) {
    if (!e.is_zero()) terms_[k].push_back(std::move(e));
  }
  DiffForm finish(const Chart& chart, int degree) {
    DiffForm out(chart, degree);
    for (auto& [k, list] : terms_) out.add_term(k, sum(std::move(list)));
    return out;
  }

 private:
  std::map<DiffForm::Key, std::vector<Expr>> terms_;
};

// Sorts a key in place, returning the permutation sign (0 on a repeat).
int sort_with_sign(DiffForm::Key& k) {
  int sign = 1;
  for (std::size_t i = 1; i < k.size(); ++i) {
    for (std::size_t j = i; j > 0 && k[j - 1] >= k[j]; --j) {
      if (k[j - 1] == k[j]) return 0;
      std::swap(k[j - 1], k[j]);
      sign = -sign;
    }
  }
  return sign;
}

Expr signed_expr(int sign, const Expr& e) { return sign > 0 ? e : -e; }

}  // namespace

DiffForm::DiffForm(Chart chart, int degree) : chart_(std::move(chart)), degree_(degree) {
  if (degree < 0) throw std::invalid_argument("negative form degree");
}

DiffForm DiffForm::function(const Chart& chart, const Expr& f) {
  DiffForm out(chart, 0);
  out.add_term({}, f);
  return out;
}

DiffForm DiffForm::differential(const Chart& chart, std::string_view name) {
  const int i = chart.index_of(name);
  if (i < 0) throw std::invalid_argument("unknown coordinate '" + std::string(name) + "'");
  DiffForm out(chart, 1);
  out.add_term({i}, Expr(1));
  return out;
}

DiffForm DiffForm::one_form(const Chart& chart, const std::vector<std::pair<std::string, Expr>>& terms) {
  Accumulator acc;
  for (const auto& [name, c] : terms) {
    const int i = chart.index_of(name);
    if (i < 0) throw std::invalid_argument("unknown coordinate '" + name + "'");
    acc.add({i}, c);
  }
  return acc.finish(chart, 1);
}

Expr DiffForm::coeff(const Key& key) const {
  auto it = terms_.find(key);
  return it == terms_.end() ? Expr(0) : it->second;
}

Expr DiffForm::coeff(const std::vector<std::string>& names) const {
  Key k;
  for (const auto& n : names) {
    const int i = chart_.index_of(n);
    if (i < 0) throw std::invalid_argument("unknown coordinate '" + n + "'");
    k.push_back(i);
  }
  const int sign = sort_with_sign(k);
  if (sign == 0) return Expr(0);
  return signed_expr(sign, coeff(k));
}

std::vector<Expr> DiffForm::coefficients() const {
  std::vector<Expr> out;
  for (const auto& [k, c] : terms_) out.push_back(c);
  return out;
}

void DiffForm::add_term(const Key& key, const Expr& c) {
  if (static_cast<int>(key.size()) != degree_) throw std::invalid_argument("key length does not match form degree");
  for (std::size_t i = 0; i < key.size(); ++i) {
    if (key[i] < 0 || key[i] >= static_cast<int>(chart_.size()) || (i > 0 && key[i - 1] >= key[i])) {
      throw std::invalid_argument("form key must be strictly increasing chart indices");
    }
  }
  if (c.is_zero()) return;
  auto it = terms_.find(key);
  if (it == terms_.end()) {
    terms_.emplace(key, c);
  } else {
    it->second = it->second + c;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

DiffForm operator+(const DiffForm& a, const DiffForm& b) {
  require_same_chart(a.chart_, b.chart_);
  if (a.degree_ != b.degree_) throw std::invalid_argument("adding forms of different degree");
  DiffForm out = a;
  for (const auto& [k, c] : b.terms_) out.add_term(k, c);
  return out;
}

DiffForm operator-(const DiffForm& a) {
  DiffForm out(a.chart_, a.degree_);
  for (const auto& [k, c] : a.terms_) out.terms_.emplace(k, -c);
  return out;
}

DiffForm operator-(const DiffForm& a, const DiffForm& b) { return a + (-b); }

DiffForm operator*(const Expr& f, const DiffForm& a) {
  DiffForm out(a.chart_, a.degree_);
  if (f.is_zero()) return out;
  for (const auto& [k, c] : a.terms_) out.add_term(k, f * c);
  return out;
}

DiffForm wedge(const DiffForm& a, const DiffForm& b) {
  require_same_chart(a.chart(), b.chart());
  const int deg = a.degree() + b.degree();
  Accumulator acc;
  if (deg <= static_cast<int>(a.chart().size())) {
    for (const auto& [ka, ca] : a.terms()) {
      for (const auto& [kb, cb] : b.terms()) {
        DiffForm::Key k = ka;
        k.insert(k.end(), kb.begin(), kb.end());
        const int sign = sort_with_sign(k);
        if (sign != 0) acc.add(k, signed_expr(sign, ca * cb));
      }
    }
  }
  return acc.finish(a.chart(), deg);
}

DiffForm exterior_derivative(const DiffForm& a) {
  const int n = static_cast<int>(a.chart().size());
  Accumulator acc;
  for (const auto& [key, c] : a.terms()) {
    for (int j = 0; j < n; ++j) {
      if (std::find(key.begin(), key.end(), j) != key.end()) continue;
      Expr dc = differentiate(c, a.chart().name(static_cast<std::size_t>(j)));
      if (dc.is_zero()) continue;
      DiffForm::Key k{j};
      k.insert(k.end(), key.begin(), key.end());
      const int sign = sort_with_sign(k);
      acc.add(k, signed_expr(sign, dc));
    }
  }
  return acc.finish(a.chart(), a.degree() + 1);
}

namespace {

// Index map from the full chart onto the slice chart (-1 for fixed coordinates).
std::pair<Chart, std::vector<int>> slice_chart(const Chart& chart, const Substitution& fixed) {
  std::vector<std::string> kept;
  std::vector<int> map(chart.size(), -1);
  for (const auto& [name, v] : fixed) {
    if (chart.index_of(name) < 0) throw std::invalid_argument("slice fixes unknown coordinate '" + name + "'");
  }
  for (std::size_t i = 0; i < chart.size(); ++i) {
    if (!fixed.count(chart.name(i))) {
      map[i] = static_cast<int>(kept.size());
      kept.push_back(chart.name(i));
    }
  }
  if (kept.empty()) throw std::invalid_argument("slice fixes every coordinate");
  return {Chart(std::move(kept)), map};
}

}  // namespace

DiffForm restrict_to_slice(const DiffForm& a, const Substitution& fixed) {
  auto [sub, map] = slice_chart(a.chart(), fixed);
  DiffForm out(sub, a.degree());
  for (const auto& [key, c] : a.terms()) {
    DiffForm::Key k;
    bool dropped = false;
    for (int i : key) {
      if (map[static_cast<std::size_t>(i)] < 0) {
        dropped = true;
        break;
      }
      k.push_back(map[static_cast<std::size_t>(i)]);
    }
    if (dropped) continue;
    out.add_term(k, substitute(c, fixed));
  }
  return out;
}

double numeric_d_check(const DiffForm& a, const EvalPoint& pt, double step) {
  const DiffForm da = exterior_derivative(a);
  const std::size_t n = a.chart().size();
  std::map<DiffForm::Key, double> fd;
  for (const auto& [key, c] : a.terms()) {
    for (std::size_t j = 0; j < n; ++j) {
      if (std::find(key.begin(), key.end(), static_cast<int>(j)) != key.end()) continue;
      const std::string& v = a.chart().name(j);
      EvalPoint hi = pt;
      EvalPoint lo = pt;
      if (!pt.count(v)) throw EvalError("point does not bind coordinate '" + v + "'");
      hi[v] += step;
      lo[v] -= step;
      const double deriv = (evaluate(c, hi) - evaluate(c, lo)) / (2.0 * step);
      DiffForm::Key k{static_cast<int>(j)};
      k.insert(k.end(), key.begin(), key.end());
      const int sign = sort_with_sign(k);
      fd[k] += sign * deriv;
    }
  }
  double worst = 0.0;
  for (const auto& [k, c] : da.terms()) {
    const double exact = evaluate(c, pt);
    worst = std::max(worst, std::abs(exact - fd[k]));
    fd.erase(k);
  }
  for (const auto& [k, v] : fd) worst = std::max(worst, std::abs(v));
  return worst;
}

// ---------------------------------------------------------------------------

SymmetricTensor::SymmetricTensor(Chart chart) : chart_(std::move(chart)), m_(chart_.size() * chart_.size()) {}

void SymmetricTensor::set(std::size_t i, std::size_t j, const Expr& e) {
  m_[i * dim() + j] = e;
  m_[j * dim() + i] = e;
}

std::vector<Expr> SymmetricTensor::entries() const {
  std::vector<Expr> out;
  for (std::size_t i = 0; i < dim(); ++i) {
    for (std::size_t j = i; j < dim(); ++j) out.push_back(at(i, j));
  }
  return out;
}

SymmetricTensor operator+(const SymmetricTensor& a, const SymmetricTensor& b) {
  require_same_chart(a.chart_, b.chart_);
  SymmetricTensor out(a.chart_);
  for (std::size_t i = 0; i < a.dim(); ++i) {
    for (std::size_t j = i; j < a.dim(); ++j) out.set(i, j, a.at(i, j) + b.at(i, j));
  }
  return out;
}

SymmetricTensor operator-(const SymmetricTensor& a, const SymmetricTensor& b) {
  require_same_chart(a.chart_, b.chart_);
  SymmetricTensor out(a.chart_);
  for (std::size_t i = 0; i < a.dim(); ++i) {
    for (std::size_t j = i; j < a.dim(); ++j) out.set(i, j, a.at(i, j) - b.at(i, j));
  }
  return out;
}

SymmetricTensor operator*(const Expr& f, const SymmetricTensor& a) {
  SymmetricTensor out(a.chart_);
  for (std::size_t i = 0; i < a.dim(); ++i) {
    for (std::size_t j = i; j < a.dim(); ++j) out.set(i, j, f * a.at(i, j));
  }
  return out;
}

SymmetricTensor sym_sum(const Chart& chart, const std::vector<std::tuple<Expr, DiffForm, DiffForm>>& terms) {
  const std::size_t n = chart.size();
  std::vector<std::vector<Expr>> acc(n * n);
  const Expr half = Expr(Rational(1, 2));
  for (const auto& [c, a, b] : terms) {
    require_same_chart(chart, a.chart());
    require_same_chart(chart, b.chart());
    if (a.degree() != 1 || b.degree() != 1) throw std::invalid_argument("symmetric product needs 1-forms");
    for (const auto& [ka, ca] : a.terms()) {
      for (const auto& [kb, cb] : b.terms()) {
        const auto i = static_cast<std::size_t>(ka[0]);
        const auto j = static_cast<std::size_t>(kb[0]);
        Expr t = product({half, c, ca, cb});
        if (t.is_zero()) continue;
        acc[i * n + j].push_back(t);
        acc[j * n + i].push_back(t);
      }
    }
  }
  SymmetricTensor out(chart);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      // (i,j) and (j,i) hold the same terms up to order; use the upper list.
      out.set(i, j, sum(acc[i * n + j]));
    }
  }
  return out;
}

SymmetricTensor sym_product(const DiffForm& a, const DiffForm& b) { return sym_sum(a.chart(), {{Expr(1), a, b}}); }

DiffForm contract(const SymmetricTensor& g, const std::vector<Expr>& v) {
  if (v.size() != g.dim()) throw std::invalid_argument("vector size does not match the chart");
  DiffForm out(g.chart(), 1);
  for (std::size_t j = 0; j < g.dim(); ++j) {
    std::vector<Expr> terms;
    for (std::size_t i = 0; i < g.dim(); ++i) {
      if (!v[i].is_zero() && !g.at(i, j).is_zero()) terms.push_back(v[i] * g.at(i, j));
    }
    out.add_term({static_cast<int>(j)}, sum(std::move(terms)));
  }
  return out;
}

SymmetricTensor restrict_to_slice(const SymmetricTensor& g, const Substitution& fixed) {
  auto [sub, map] = slice_chart(g.chart(), fixed);
  SymmetricTensor out(sub);
  for (std::size_t i = 0; i < g.dim(); ++i) {
    for (std::size_t j = i; j < g.dim(); ++j) {
      const int a = map[i];
      const int b = map[j];
      if (a < 0 || b < 0) continue;
      out.set(static_cast<std::size_t>(a), static_cast<std::size_t>(b), substitute(g.at(i, j), fixed));
    }
  }
  return out;
}

}  // namespace paracr
