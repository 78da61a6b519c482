#include "paracr/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "paracr/curvature.hpp"
#include "paracr/metric.hpp"
#include "paracr/models.hpp"
#include "paracr/ode.hpp"
#include "paracr/ppwave.hpp"

namespace paracr::cli {

using json = nlohmann::ordered_json;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void fail_at(int line, const std::string& msg) {
  throw ConfigError("line " + std::to_string(line) + ": " + msg);
}

double parse_number(const std::string& s, int line) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(v)) fail_at(line, "expected a number, got '" + s + "'");
  return v;
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  return std::all_of(k.begin(), k.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; });
}

// Value text after '=', with a trailing comment removed.
ConfigEntry parse_value(const std::string& key, std::string_view raw, int line) {
  ConfigEntry e;
  e.key = key;
  e.line = line;
  std::string v = trim(raw);
  if (v.empty()) fail_at(line, "missing value for '" + key + "'");
  if (v[0] == '"') {
    std::string out;
    std::size_t i = 1;
    for (; i < v.size() && v[i] != '"'; ++i) {
      if (v[i] == '\\') {
        if (++i >= v.size()) break;
        if (v[i] != '"' && v[i] != '\\') fail_at(line, "unsupported escape in string");
      }
      out.push_back(v[i]);
    }
    if (i >= v.size()) fail_at(line, "unterminated string");
    const std::string rest = trim(std::string_view(v).substr(i + 1));
    if (!rest.empty() && rest[0] != '#') fail_at(line, "unexpected text after string");
    e.text = out;
    e.quoted = true;
    return e;
  }
  if (const auto hash = v.find('#'); hash != std::string::npos) v = trim(std::string_view(v).substr(0, hash));
  if (v.empty()) fail_at(line, "missing value for '" + key + "'");
  if (v[0] == '[') {
    if (v.back() != ']') fail_at(line, "unterminated list");
    e.is_list = true;
    e.text = v;
    std::stringstream ss(v.substr(1, v.size() - 2));
    std::string item;
    while (std::getline(ss, item, ',')) e.list.push_back(parse_number(trim(item), line));
    return e;
  }
  e.text = v;
  return e;
}

}  // namespace

const std::vector<std::string>& job_kinds() {
  static const std::vector<std::string> k = {"pde-invariants", "pde-metric", "ode-112", "ode-111",
                                             "flat-model",     "si-family",  "ppwave"};
  return k;
}

JobConfig parse_config(std::string_view text) {
  JobConfig cfg;
  std::vector<ConfigEntry>* current = nullptr;
  std::string section;
  std::set<std::string> seen_sections, seen_keys;
  bool have_kind = false;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty() || s[0] == '#') continue;
    if (s[0] == '[') {
      const auto close = s.find(']');
      if (close == std::string::npos) fail_at(line, "unterminated section header");
      const std::string rest = trim(std::string_view(s).substr(close + 1));
      if (!rest.empty() && rest[0] != '#') fail_at(line, "unexpected text after section header");
      section = trim(std::string_view(s).substr(1, close - 1));
      if (!seen_sections.insert(section).second) fail_at(line, "duplicate section [" + section + "]");
      if (section == "job") current = &cfg.job;
      else if (section == "exprs") current = &cfg.exprs;
      else if (section == "domain") current = &cfg.domain;
      else if (section == "tolerances") current = &cfg.tolerances;
      else fail_at(line, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail_at(line, "expected 'key = value'");
    if (current == nullptr) fail_at(line, "key outside of a section");
    const std::string key = trim(std::string_view(s).substr(0, eq));
    if (!valid_key(key)) fail_at(line, "invalid key '" + key + "'");
    if (!seen_keys.insert(section + "." + key).second) fail_at(line, "duplicate key '" + key + "'");
    ConfigEntry e = parse_value(key, std::string_view(s).substr(eq + 1), line);
    if (section == "job" && key == "kind") {
      if (e.is_list) fail_at(line, "kind must be a name");
      if (std::find(job_kinds().begin(), job_kinds().end(), e.text) == job_kinds().end()) {
        fail_at(line, "unknown job kind '" + e.text + "'");
      }
      cfg.kind = e.text;
      have_kind = true;
    } else if (section == "job" && key == "seed") {
      if (e.is_list || e.quoted || e.text.empty() ||
          !std::all_of(e.text.begin(), e.text.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
        fail_at(line, "seed must be a non-negative integer");
      }
      try {
        cfg.seed = std::stoull(e.text);
      } catch (const std::exception&) {
        fail_at(line, "seed out of range");
      }
    } else if (section == "job" && key == "output") {
      cfg.output = e.text;
    } else {
      current->push_back(std::move(e));
    }
  }
  if (!have_kind) throw ConfigError("missing [job] kind");
  return cfg;
}

JobConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

namespace {

// Typed, echoing access to one section; unknown keys are errors.
class Section {
 public:
  Section(std::string name, const std::vector<ConfigEntry>& entries) : name_(std::move(name)), entries_(entries) {}

  const ConfigEntry* find(const std::string& key) {
    for (const auto& e : entries_) {
      if (e.key == key) {
        used_.insert(key);
        return &e;
      }
    }
    return nullptr;
  }

  double number(const std::string& key, double def, bool positive = false) {
    double v = def;
    if (const auto* e = find(key)) {
      if (e->is_list || e->quoted) fail_at(e->line, "'" + key + "' must be a number");
      v = parse_number(e->text, e->line);
      if (positive && !(v > 0)) fail_at(e->line, "'" + key + "' must be positive");
    }
    echo_[key] = v;
    return v;
  }

  int integer(const std::string& key, int def, int min, int max) {
    int v = def;
    if (const auto* e = find(key)) {
      const double d = e->is_list || e->quoted ? NAN : parse_number(e->text, e->line);
      if (!(d == std::floor(d)) || d < min || d > max) {
        fail_at(e->line, "'" + key + "' must be an integer in [" + std::to_string(min) + ", " + std::to_string(max) + "]");
      }
      v = static_cast<int>(d);
    }
    echo_[key] = v;
    return v;
  }

  std::string word(const std::string& key, const std::string& def, const std::vector<std::string>& allowed) {
    std::string v = def;
    if (const auto* e = find(key)) {
      if (e->is_list || std::find(allowed.begin(), allowed.end(), e->text) == allowed.end()) {
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
        fail_at(e->line, "'" + key + "' must be one of: " + list);
      }
      v = e->text;
    }
    echo_[key] = v;
    return v;
  }

  bool flag(const std::string& key, bool def) {
    return word(key, def ? "true" : "false", {"true", "false"}) == "true";
  }

  Interval interval(const std::string& key, Interval def) {
    Interval v = def;
    if (const auto* e = find(key)) v = as_interval(*e);
    echo_[key] = json::array({v.lo, v.hi});
    return v;
  }

  Expr expr(const std::string& key, const char* def) {
    const auto* e = find(key);
    if (e == nullptr && def == nullptr) throw ConfigError("missing [" + name_ + "] " + key);
    if (e != nullptr && e->is_list) fail_at(e->line, "'" + key + "' must be an expression");
    const std::string text = e ? e->text : def;
    echo_[key] = text;
    try {
      return parse_expr(text);
    } catch (const std::exception& err) {
      throw ConfigError((e ? "line " + std::to_string(e->line) + ": " : std::string()) + "cannot parse " + key +
                        " = \"" + text + "\": " + err.what());
    }
  }

  std::optional<Expr> optional_expr(const std::string& key) {
    if (find(key) == nullptr) return std::nullopt;
    return expr(key, nullptr);
  }

  static Interval as_interval(const ConfigEntry& e) {
    if (!e.is_list || e.list.size() != 2 || !(e.list[0] < e.list[1])) {
      fail_at(e.line, "'" + e.key + "' must be an interval [lo, hi] with lo < hi");
    }
    return {e.list[0], e.list[1]};
  }

  [[nodiscard]] const std::vector<ConfigEntry>& entries() const { return entries_; }
  void mark_used(const std::string& key) { used_.insert(key); }
  json& echo() { return echo_; }

  void finish() const {
    for (const auto& e : entries_) {
      if (!used_.count(e.key)) fail_at(e.line, "unknown key '" + e.key + "' in [" + name_ + "]");
    }
  }

 private:
  std::string name_;
  const std::vector<ConfigEntry>& entries_;
  std::set<std::string> used_;
  json echo_ = json::object();
};

struct Ctx {
  Section job, exprs, domain, tol;
  std::uint64_t seed;
  Report report;

  explicit Ctx(const JobConfig& cfg)
      : job("job", cfg.job), exprs("exprs", cfg.exprs), domain("domain", cfg.domain), tol("tolerances", cfg.tolerances),
        seed(cfg.seed) {}

  // Sample count, guard floor, scale bound, zero tolerance and per-variable
  // intervals; defaults come from `base`.
  SampleDomain sample_domain(SampleDomain base, const std::vector<std::string>& variables, int default_samples) {
    base.samples = domain.integer("samples", default_samples, 1, 100000);
    base.guard_floor = domain.number("guard_floor", base.guard_floor, true);
    base.derived_floor = domain.number("derived_guard_floor", base.derived_floor > 0 ? base.derived_floor : base.guard_floor, true);
    base.scale_bound = domain.number("scale_bound", base.scale_bound, true);
    base.tol_zero = tol.number("zero", base.tol_zero, true);
    base.seed = seed;
    for (const auto& v : variables) {
      if (!base.intervals.count(v)) base.intervals[v] = {-1.0, 1.0};
      base.intervals[v] = domain.interval(v, base.intervals[v]);
    }
    return base;
  }

  void add_zero(const std::string& name, const Expr& e, const SampleDomain& dom) {
    const auto z = is_identically_zero(e, dom);
    report.add(zero_check(name, z));
    report.add_value(name + " max abs", z.max_abs);
  }
};

void flag_starved(Check& c, const SampleSet& set, int wanted) {
  if (set.inconclusive() || static_cast<int>(set.accepted.size()) < wanted) {
    if (c.verdict == Verdict::Pass) c.verdict = Verdict::Inconclusive;
    c.detail = std::to_string(set.accepted.size()) + " of " + std::to_string(wanted) + " samples accepted";
  }
}

Check failure(std::string name, const std::string& why) {
  Check c;
  c.name = std::move(name);
  c.verdict = Verdict::Fail;
  c.residual = NAN;
  c.detail = why;
  return c;
}

const std::vector<std::string> kJetVars = {"x", "y", "z", "p", "q", "s"};

SampleDomain jet_sample_domain(Ctx& ctx, const PdePair& pp) {
  const Interval box = ctx.domain.interval("box", {-1.0, 1.0});
  return ctx.sample_domain(jet_domain(pp, box.lo, box.hi), kJetVars, 20);
}

// --- pde-invariants -------------------------------------------------------

void run_pde_invariants(Ctx& ctx) {
  const auto pp = PdePair::make(ctx.exprs.expr("R", nullptr), ctx.exprs.expr("T", nullptr));
  const auto dom = jet_sample_domain(ctx, pp);
  const auto td = total_derivative_fields(pp);
  ctx.report.append(defining_relations_check(pp, dom), "total derivatives");
  ctx.report.append(commutator_residual(pp, dom), "commutator");
  ctx.add_zero("integrability", integrability_residual(pp, td), dom);
  const auto [J1, J2] = point_metricity_invariants(pp, td);
  ctx.add_zero("J1", J1, dom);
  ctx.add_zero("J2", J2, dom);
  const auto [K1pt, K2pt] = torsion_obstructions(pp);
  ctx.add_zero("K1pt", K1pt, dom);
  ctx.add_zero("K2pt", K2pt, dom);
  const auto [K1ct, K2ct] = contact_weyl_invariants(pp);
  ctx.add_zero("K1ct", K1ct, dom);
  ctx.add_zero("K2ct", K2ct, dom);
}

// --- pde-metric -----------------------------------------------------------

struct CurvatureStats {
  double riemann = 0, ricci = 0, weyl = 0, scalar_min = INFINITY, scalar_max = -INFINITY;
  std::optional<EvalPoint> riemann_at, weyl_at;
  int evaluated = 0;
};

CurvatureStats curvature_stats(const CurvatureReport& c, const std::vector<EvalPoint>& pts) {
  CurvatureStats st;
  for (const auto& pt : pts) {
    CurvatureValues v;
    try {
      v = c.at(pt);
    } catch (const EvalError&) {
      continue;
    }
    ++st.evaluated;
    if (const double r = max_abs(v.riemann); r >= st.riemann) {
      st.riemann = r;
      st.riemann_at = pt;
    }
    if (const double w = max_abs(v.weyl); w >= st.weyl) {
      st.weyl = w;
      st.weyl_at = pt;
    }
    st.ricci = std::max(st.ricci, max_abs(v.ricci));
    st.scalar_min = std::min(st.scalar_min, v.scalar);
    st.scalar_max = std::max(st.scalar_max, v.scalar);
  }
  return st;
}

void run_pde_metric(Ctx& ctx) {
  const auto pp = PdePair::make(ctx.exprs.expr("R", nullptr), ctx.exprs.expr("T", nullptr));
  const std::string kind = ctx.job.word("metric", "mne1", {"mne1", "mne2"});
  const Expr x0 = ctx.job.expr("x0", "0");
  const Expr y0 = ctx.job.expr("y0", "0");
  const std::string expect = ctx.job.word("expect", "none", {"none", "flat", "conformally-flat"});
  const double curv_tol = ctx.tol.number("curvature", 1e-7, true);
  const double id_tol = ctx.tol.number("identities", 1e-7, true);
  const double fd_tol = ctx.tol.number("finite_difference", 1e-6, true);
  const auto dom = jet_sample_domain(ctx, pp);

  std::optional<DegenerateMetric> m;
  try {
    m = build_metric(pp, kind == "mne1" ? MetricKind::Mne1 : MetricKind::Mne2);
  } catch (const std::domain_error& e) {
    ctx.report.add(failure("metric guard", e.what()));
    return;
  }
  ctx.report.append(degeneracy_and_descent_check(*m, pp, dom), "descent");
  const Metric4 g = descend(*m, x0, y0);

  SampleDomain slice;
  for (const auto& v : g.chart().names()) slice.intervals[v] = dom.intervals.at(v);
  slice.samples = dom.samples;
  slice.seed = dom.seed;
  slice.guard_floor = dom.guard_floor;
  slice.derived_floor = dom.derived_floor;
  slice.scale_bound = dom.scale_bound;
  slice.tol_zero = dom.tol_zero;
  ctx.report.append(nondegeneracy_check(g, slice), "slice");

  const CurvatureReport c(g);
  const SampleSet set = draw_samples(g.tensor().entries(), slice);
  std::vector<EvalPoint> pts;
  for (const auto& s : set.accepted) pts.push_back(s.point);
  ctx.report.append(curvature_identity_checks(c, pts, id_tol), "slice curvature");

  double fd = 0;
  std::optional<EvalPoint> fd_at;
  for (const auto& pt : pts) {
    try {
      if (const double r = christoffel_fd_residual(c, pt); r >= fd) {
        fd = r;
        fd_at = pt;
      }
    } catch (const EvalError&) {
    }
  }
  Check fdc = bound_check("slice curvature/Christoffel vs finite differences", fd, fd_tol, fd_at);
  flag_starved(fdc, set, slice.samples);
  ctx.report.add(std::move(fdc));

  const auto st = curvature_stats(c, pts);
  if (expect == "flat") {
    Check ch = bound_check("slice curvature/Riemann vanishes", st.riemann, curv_tol, st.riemann_at);
    flag_starved(ch, set, slice.samples);
    ctx.report.add(std::move(ch));
  } else if (expect == "conformally-flat") {
    Check ch = bound_check("slice curvature/Weyl vanishes", st.weyl, curv_tol, st.weyl_at);
    flag_starved(ch, set, slice.samples);
    ctx.report.add(std::move(ch));
  }
  ctx.report.add_value("symbolic curvature", c.symbolic() ? 1.0 : 0.0);
  ctx.report.add_value("riemann_max", st.riemann);
  ctx.report.add_value("ricci_max", st.ricci);
  ctx.report.add_value("weyl_max", st.weyl);
  if (st.evaluated > 0) {
    ctx.report.add_value("scalar_min", st.scalar_min);
    ctx.report.add_value("scalar_max", st.scalar_max);
  }
}

// --- ode-112 --------------------------------------------------------------

void run_ode112(Ctx& ctx) {
  const Expr p = ctx.exprs.expr("p", nullptr);
  const auto F = ctx.exprs.optional_expr("F");
  const auto psi = ctx.exprs.optional_expr("psi");
  const std::string expect = ctx.job.word("expect_branch", "any", {"any", "generic", "degenerate", "mixed"});
  const double a2_seed = ctx.job.number("a2_seed", 0.5);
  const double rel = ctx.tol.number("relative", 1e-7, true);
  const double sol = ctx.tol.number("solution", 1e-8, true);
  SampleDomain base;
  for (const char* v : {"x", "y", "a0", "a1", "a2", "y1", "y2"}) base.set(v, 0.5, 2.0);
  const auto dom = ctx.sample_domain(base, {"x", "y", "a0", "a1", "a2", "y1", "y2"}, 20);

  const auto d = ParaCrDatum112::make(p);
  SampleDomain idom = dom;
  for (const char* v : {"a0", "y1", "y2"}) idom.intervals.erase(v);
  const auto inv = invariant_I(d, idom);
  Check bc;
  bc.name = "I branch";
  bc.verdict = expect == "any" || expect == branch_name(inv.branch) ? Verdict::Pass : Verdict::Fail;
  bc.residual = inv.min_abs;
  bc.witness = inv.test.witness;
  bc.detail = branch_name(inv.branch);
  if (inv.test.verdict == ZeroVerdict::Inconclusive && bc.verdict == Verdict::Pass) bc.verdict = Verdict::Inconclusive;
  ctx.report.add(std::move(bc));
  ctx.report.add_value("I min abs", inv.min_abs);
  ctx.report.add_value("I max abs", inv.test.max_abs);

  if (F) {
    const auto sys = third_order_system(d);
    SampleDomain jdom = dom;
    for (const char* v : {"a0", "a1", "a2"}) jdom.intervals.erase(v);
    const SampleSet set = draw_samples({*F}, jdom);
    double worst = 0;
    std::optional<EvalPoint> at;
    std::string error;
    for (const auto& s : set.accepted) {
      const JetPoint3 pt{s.point.at("x"), s.point.at("y"), s.point.at("y1"), s.point.at("y2")};
      try {
        const double got = reduce_to_third_order(sys, pt, a2_seed).F;
        const double err = std::abs(got - s.values[0]) / std::max(1.0, std::abs(s.values[0]));
        if (!(err < worst)) {
          worst = err;
          at = s.point;
        }
      } catch (const ReductionError& e) {
        error = e.what();
        at = s.point;
        break;
      }
    }
    if (!error.empty()) {
      Check c = failure("reduction vs F", error);
      c.witness = at;
      ctx.report.add(std::move(c));
    } else {
      Check c = bound_check("reduction vs F", worst, rel, at);
      flag_starved(c, set, jdom.samples);
      if (c.verdict == Verdict::Pass) c.witness.reset();
      ctx.report.add(std::move(c));
    }
    if (psi) {
      SampleDomain sdom = dom;
      for (const char* v : {"y", "y1", "y2"}) sdom.intervals.erase(v);
      ctx.report.append(check_solution_ode(*F, *psi, sdom, sol), "solution");
    }
  } else if (psi) {
    throw ConfigError("[exprs] psi needs F");
  }
}

// --- ode-111 --------------------------------------------------------------

void run_ode111(Ctx& ctx) {
  const auto d = ParaCrDatum111::make(ctx.exprs.expr("p", nullptr));
  SampleDomain base;
  base.set("x", -0.5, 0.5).set("y", -0.5, 0.5).set("a1", 1.5, 2.5);
  const auto dom = ctx.sample_domain(base, {"x", "y", "a1"}, 20);
  const auto [J, K] = second_order_invariants(d);
  ctx.add_zero("Jnum", J, dom);
  ctx.add_zero("Knum", K, dom);
}

// --- flat-model -----------------------------------------------------------

void run_flat_model(Ctx& ctx) {
  const bool mutations = ctx.job.flag("mutations", true);
  const int newman_samples = ctx.job.integer("newman_samples", 500, 0, 1000000);
  const double newman_tol = ctx.tol.number("newman", 1e-9, true);
  SampleDomain base = flat_bundle_domain(30, ctx.seed, 0.1);
  base.tol_zero = 1e-8;
  const auto dom = ctx.sample_domain(base, flat_bundle_chart().names(), 30);

  const auto c = flat_coframe();
  ctx.report.append(verify_structure_equations(c, dom), "structure");

  std::vector<Expr> dd;
  for (const auto& f : c.forms) {
    const auto coeffs = exterior_derivative(exterior_derivative(f)).coefficients();
    dd.insert(dd.end(), coeffs.begin(), coeffs.end());
  }
  SampleDomain positive = dom;
  positive.set("a", 0.5, 2).set("f11", 0.5, 2).set("f22", 0.5, 2);
  ctx.report.add(zero_check("d^2 = 0 on the coframe", all_identically_zero(dd, positive)));

  ctx.report.add(zero_check("metric identity", all_identically_zero(flat_metric_defect(c).entries(), dom)));

  const Chart sol({"a0", "a1", "a2", "a3"});
  SymmetricTensor g(sol);
  g.set(0, 3, Expr(1));
  g.set(1, 2, Expr(-1));
  const CurvatureReport cr{Metric4(g)};
  int nonzero = 0;
  for (const auto& e : cr.expressions().riemann) nonzero += !e.is_zero();
  Check fl;
  fl.name = "solution-space metric is flat";
  fl.verdict = cr.symbolic() && nonzero == 0 ? Verdict::Pass : Verdict::Fail;
  fl.residual = nonzero;
  fl.detail = "symbolic Riemann components not identically zero: " + std::to_string(nonzero);
  ctx.report.add(std::move(fl));

  if (mutations) {
    const Expr eps(Rational(1, 100));
    const auto& names = flat_bundle_chart().names();
    int missed = 0;
    std::string first;
    for (std::size_t i = 0; i < c.forms.size(); ++i) {
      for (const auto& n : names) {
        auto m = c;
        m.forms[i] = m.forms[i] + eps * DiffForm::differential(flat_bundle_chart(), n);
        if (verify_structure_equations(m, dom).passed()) {
          if (missed++ == 0) first = std::string(FlatCoframe::names()[i]) + " + 0.01 d" + n;
        }
      }
    }
    Check mc;
    mc.name = "single-form mutations detected";
    mc.verdict = missed == 0 ? Verdict::Pass : Verdict::Fail;
    mc.residual = missed;
    mc.detail = std::to_string(c.forms.size() * names.size() - missed) + " of " +
                std::to_string(c.forms.size() * names.size()) + " detected" +
                (missed ? "; first missed: " + first : "");
    ctx.report.add(std::move(mc));
  }

  if (newman_samples > 0) {
    std::mt19937_64 rng(ctx.seed);
    std::uniform_real_distribution<double> u(-1, 1);
    int disagree = 0, tangent = 0;
    std::optional<EvalPoint> at;
    for (int k = 0; k < newman_samples; ++k) {
      const std::array<double, 4> a = {u(rng), u(rng), u(rng), u(rng)};
      std::array<double, 4> da = {u(rng), u(rng), u(rng), 0};
      da[3] = (u(rng) < 0 ? -1 : 1) * (0.1 + std::abs(u(rng)));
      if (k % 2 == 0) da[0] = da[1] * da[2] / da[3];
      const double n2 = da[0] * da[0] + da[1] * da[1] + da[2] * da[2] + da[3] * da[3];
      const bool null = std::abs(da[0] * da[3] - da[1] * da[2]) < newman_tol * n2;
      const auto t = newman_tangency(a, da, newman_tol);
      tangent += t.tangent;
      if (t.tangent != null && disagree++ == 0) {
        at = EvalPoint{{"a0", a[0]}, {"a1", a[1]}, {"a2", a[2]}, {"a3", a[3]},
                       {"da0", da[0]}, {"da1", da[1]}, {"da2", da[2]}, {"da3", da[3]}};
      }
    }
    Check nc;
    nc.name = "tangency iff null displacement";
    nc.verdict = disagree == 0 ? Verdict::Pass : Verdict::Fail;
    nc.residual = disagree;
    nc.tolerance = newman_tol;
    nc.witness = at;
    nc.detail = std::to_string(newman_samples) + " pairs, " + std::to_string(tangent) + " tangent";
    ctx.report.add(std::move(nc));
  }
}

// --- si-family ------------------------------------------------------------

void run_si_family(Ctx& ctx) {
  const Expr kappa = ctx.exprs.expr("kappa", "1");
  if (!kappa.is_constant()) throw ConfigError("[exprs] kappa must be a constant");
  const double sol_tol = ctx.tol.number("solution", 1e-8, true);
  const double sd_tol = ctx.tol.number("scalar_sd", 1e-7, true);
  const double weyl_tol = ctx.tol.number("weyl", 1e-6, true);
  const int samples = ctx.domain.integer("samples", 50, 2, 100000);
  SampleDomain probe;
  probe.tol_zero = ctx.tol.number("zero", 1e-9, true);

  const auto f = si_family(kappa);
  ctx.report.append(check_solution_pde(f.pair, f.psi, si_solution_domain(samples, ctx.seed), sol_tol), "solution");
  SampleDomain jdom = si_jet_domain(f.pair, 20, ctx.seed);
  jdom.tol_zero = probe.tol_zero;
  ctx.add_zero("integrability", integrability_residual(f.pair), jdom);
  const auto [J1, J2] = point_metricity_invariants(f.pair);
  ctx.add_zero("J1", J1, jdom);
  ctx.add_zero("J2", J2, jdom);

  const CurvatureReport c(f.g);
  const SampleSet set = draw_samples({f.g.at(0, 1)}, si_metric_domain(f, samples, ctx.seed));
  double mean = 0, sq = 0, weyl = 0;
  std::optional<EvalPoint> weyl_at;
  int n = 0;
  for (const auto& s : set.accepted) {
    const auto T = c.at(s.point);
    mean += T.scalar;
    sq += T.scalar * T.scalar;
    if (const double w = max_abs(T.weyl); w >= weyl) {
      weyl = w;
      weyl_at = s.point;
    }
    ++n;
  }
  if (n > 0) mean /= n;
  const double sd = n > 0 ? std::sqrt(std::max(0.0, sq / n - mean * mean)) : NAN;
  Check sc = bound_check("scalar curvature constant", sd, sd_tol);
  flag_starved(sc, set, samples);
  ctx.report.add(std::move(sc));
  Check wc = bound_check("Weyl vanishes", weyl, weyl_tol, weyl_at);
  flag_starved(wc, set, samples);
  ctx.report.add(std::move(wc));
  if (kappa.is_zero()) {
    int nonzero = 0;
    for (const auto& e : c.expressions().riemann) nonzero += !e.is_zero();
    Check rc;
    rc.name = "Riemann vanishes identically";
    rc.verdict = c.symbolic() && nonzero == 0 ? Verdict::Pass : Verdict::Fail;
    rc.residual = nonzero;
    ctx.report.add(std::move(rc));
  }
  ctx.report.add_value("scalar_mean", mean);
  ctx.report.add_value("scalar_sd", sd);
  ctx.report.add_value("weyl_max", weyl);
}

// --- ppwave ---------------------------------------------------------------

void run_ppwave(Ctx& ctx) {
  const Expr r = ctx.exprs.expr("r", nullptr);
  const Expr t = ctx.exprs.expr("t", nullptr);
  const Interval range = ctx.domain.interval("s", {-0.4, 0.4});
  PpWaveOptions opt;
  opt.samples = ctx.domain.integer("samples", 20, 1, 100000);
  opt.seed = ctx.seed;
  opt.weyl_rel_tol = ctx.tol.number("weyl_relative", opt.weyl_rel_tol, true);
  opt.quadratic_tol = ctx.tol.number("quadratic", opt.quadratic_tol, true);
  opt.flat_tol = ctx.tol.number("weyl_flat", opt.flat_tol, true);
  opt.ricci_tol = ctx.tol.number("ricci", opt.ricci_tol, true);
  opt.parallel_tol = ctx.tol.number("parallel", opt.parallel_tol, true);
  const bool gauge = ctx.job.flag("gauge", true);
  const double s0 = ctx.job.number("s0", 0.0);
  const double h0 = ctx.job.number("h0", 0.0);
  const double hp0 = ctx.job.number("hp0", 0.0);
  const double step = ctx.job.number("step", 1e-3, true);
  if (s0 < range.lo || s0 > range.hi) throw ConfigError("[job] s0 must lie in [domain] s");

  const auto f = PpWaveFamily::make(r, t, range);
  const auto [Z1, Z2] = z_invariants(f);
  ctx.report.add_value("Z1 identically zero", Z1.is_zero() ? 1.0 : 0.0);
  ctx.report.add_value("Z2 identically zero", Z2.is_zero() ? 1.0 : 0.0);
  ctx.report.append(verify_ppwave(f, nullptr, opt), "ungauged");
  if (!gauge) return;
  try {
    const auto g = ricci_flat_gauge(f, s0, h0, hp0, range, step);
    ctx.report.append(verify_ppwave(f, &g, opt), "gauged");
  } catch (const GaugeError& e) {
    ctx.report.add(failure("gauged/gauge", e.what()));
  }
}

}  // namespace

JobResult run_job(const JobConfig& cfg) {
  Ctx ctx(cfg);
  ctx.report.title = cfg.kind;
  try {
    if (cfg.kind == "pde-invariants") run_pde_invariants(ctx);
    else if (cfg.kind == "pde-metric") run_pde_metric(ctx);
    else if (cfg.kind == "ode-112") run_ode112(ctx);
    else if (cfg.kind == "ode-111") run_ode111(ctx);
    else if (cfg.kind == "flat-model") run_flat_model(ctx);
    else if (cfg.kind == "si-family") run_si_family(ctx);
    else if (cfg.kind == "ppwave") run_ppwave(ctx);
    else throw ConfigError("unknown job kind '" + cfg.kind + "'");
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid job: ") + e.what());
  }
  ctx.job.finish();
  ctx.exprs.finish();
  ctx.domain.finish();
  ctx.tol.finish();

  JobResult out;
  out.seed = cfg.seed;
  out.report = std::move(ctx.report);
  out.echo["kind"] = cfg.kind;
  out.echo["params"] = std::move(ctx.job.echo());
  out.echo["exprs"] = std::move(ctx.exprs.echo());
  out.echo["domain"] = std::move(ctx.domain.echo());
  out.echo["tolerances"] = std::move(ctx.tol.echo());
  return out;
}

json report_json(const JobResult& r) {
  json j;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["seed"] = r.seed;
  j["job"] = r.echo.is_null() ? json::object() : r.echo;
  j["overall"] = verdict_name(r.report.overall());
  json checks = json::array();
  for (const auto& c : r.report.checks) {
    json cj;
    cj["name"] = c.name;
    cj["verdict"] = verdict_name(c.verdict);
    cj["residual"] = c.residual;
    cj["tolerance"] = c.tolerance;
    if (c.witness) {
      json w = json::object();
      for (const auto& [k, v] : *c.witness) w[k] = v;
      cj["witness"] = std::move(w);
    } else {
      cj["witness"] = nullptr;
    }
    cj["detail"] = c.detail;
    checks.push_back(std::move(cj));
  }
  j["checks"] = std::move(checks);
  json values = json::array();
  for (const auto& [n, v] : r.report.values) values.push_back(json{{"name", n}, {"value", v}});
  j["values"] = std::move(values);
  return j;
}

namespace {
std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}
}  // namespace

std::string render_report(const JobResult& r, Format fmt) {
  if (fmt == Format::Json) return report_json(r).dump(2) + "\n";
  std::ostringstream os;
  const std::string kind = r.echo.is_object() && r.echo.contains("kind") ? r.echo["kind"].get<std::string>() : "";
  os << kToolName << " " << kToolVersion << "  kind=" << kind << "  seed=" << r.seed << "\n";
  int counts[3] = {0, 0, 0};
  for (const auto& c : r.report.checks) {
    ++counts[static_cast<int>(c.verdict)];
    std::string v = verdict_name(c.verdict);
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char ch) { return std::toupper(ch); });
    os << "  " << v << std::string(v.size() < 13 ? 13 - v.size() : 1, ' ') << c.name << "  residual "
       << fmt_double(c.residual) << " (tol " << fmt_double(c.tolerance) << ")";
    if (!c.detail.empty()) os << "  " << c.detail;
    if (c.witness && c.verdict != Verdict::Pass) {
      os << "  at";
      for (const auto& [k, v2] : *c.witness) os << " " << k << "=" << fmt_double(v2);
    }
    os << "\n";
  }
  if (!r.report.values.empty()) {
    os << "values:\n";
    for (const auto& [n, v] : r.report.values) os << "  " << n << " = " << fmt_double(v) << "\n";
  }
  os << "overall: " << verdict_name(r.report.overall()) << " (" << counts[0] << " pass, " << counts[1] << " fail, "
     << counts[2] << " inconclusive)\n";
  return os.str();
}

int exit_status(const Report& r) {
  switch (r.overall()) {
    case Verdict::Pass: return 0;
    case Verdict::Fail: return 1;
    case Verdict::Inconclusive: return 3;
  }
  return 1;
}

std::string check_expr(std::string_view text) {
  const Expr e = parse_expr(text);
  std::ostringstream os;
  os << "input:     " << text << "\n";
  os << "parsed:    " << e.str() << "\n";
  os << "nodes:     " << node_count(e) << "\n";
  const auto vars = free_variables(e);
  os << "variables:";
  for (const auto& v : vars) os << " " << v;
  os << "\n";
  for (const auto& v : vars) os << "d/d" << v << ":" << std::string(v.size() < 6 ? 6 - v.size() : 1, ' ')
                                << differentiate(e, v).str() << "\n";
  const auto guards = singular_guards(e);
  if (!guards.empty()) {
    os << "guards:   ";
    for (const auto& g : guards) os << " " << g.str() << " != 0;";
    os << "\n";
  }
  // Round trip: the printed form parses back to the same tree.
  os << "roundtrip: " << (parse_expr(e.str()).str() == e.str() ? "ok" : "MISMATCH") << "\n";
  return os.str();
}

}  // namespace paracr::cli
