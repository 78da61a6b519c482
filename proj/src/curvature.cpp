#include "paracr/curvature.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "paracr/tape.hpp"

namespace paracr {

namespace {

template <class S>
struct Jet2 {
  std::array<S, 16> g{}, ginv{};
  std::array<std::array<S, 16>, 4> dg{};
  std::array<std::array<std::array<S, 16>, 4>, 4> ddg{};
};

bool is_zero_s(double v) { return v == 0.0; }
bool is_zero_s(const Expr& e) { return e.is_zero(); }

double sum_s(std::vector<double>& t) {
  double r = 0.0;
  for (double v : t) r += v;
  return r;
}
Expr sum_s(std::vector<Expr>& t) { return sum(std::move(t)); }

template <class S>
S ratio(int n, int d) {
  if constexpr (std::is_same_v<S, double>) {
    return static_cast<double>(n) / d;
  } else {
    return Expr(Rational(n, d));
  }
}

// Collects products, skipping structural zeros.
template <class S>
struct Terms {
  std::vector<S> t;
  void add(const S& a) {
    if (!is_zero_s(a)) t.push_back(a);
  }
  void add(const S& a, const S& b) {
    if (!is_zero_s(a) && !is_zero_s(b)) t.push_back(a * b);
  }
  void add(const S& a, const S& b, const S& c) {
    if (!is_zero_s(a) && !is_zero_s(b) && !is_zero_s(c)) t.push_back(a * b * c);
  }
  S total() {
    S r = sum_s(t);
    t.clear();
    return r;
  }
};

template <class S>
std::array<std::array<S, 64>, 4> christoffel(const Jet2<S>& J, CurvatureTensors<S>& T) {
  const S half = ratio<S>(1, 2);
  std::array<S, 64> lower{};  // Gamma_ljk
  for (std::size_t l = 0; l < 4; ++l) {
    for (std::size_t j = 0; j < 4; ++j) {
      for (std::size_t k = j; k < 4; ++k) {
        Terms<S> acc;
        acc.add(J.dg[j][idx2(l, k)]);
        acc.add(J.dg[k][idx2(l, j)]);
        acc.add(-J.dg[l][idx2(j, k)]);
        lower[idx3(l, j, k)] = lower[idx3(l, k, j)] = half * acc.total();
      }
    }
  }
  std::array<std::array<S, 16>, 4> dginv{};
  for (std::size_t m = 0; m < 4; ++m) {
    std::array<S, 16> tmp{};
    for (std::size_t a = 0; a < 4; ++a) {
      for (std::size_t b = 0; b < 4; ++b) {
        Terms<S> acc;
        for (std::size_t c = 0; c < 4; ++c) acc.add(J.ginv[idx2(a, c)], J.dg[m][idx2(c, b)]);
        tmp[idx2(a, b)] = acc.total();
      }
    }
    for (std::size_t a = 0; a < 4; ++a) {
      for (std::size_t b = a; b < 4; ++b) {
        Terms<S> acc;
        for (std::size_t c = 0; c < 4; ++c) acc.add(tmp[idx2(a, c)], J.ginv[idx2(c, b)]);
        dginv[m][idx2(a, b)] = dginv[m][idx2(b, a)] = -acc.total();
      }
    }
  }
  std::array<std::array<S, 64>, 4> dgamma{};
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      for (std::size_t k = j; k < 4; ++k) {
        Terms<S> acc;
        for (std::size_t l = 0; l < 4; ++l) acc.add(J.ginv[idx2(i, l)], lower[idx3(l, j, k)]);
        T.gamma[idx3(i, j, k)] = T.gamma[idx3(i, k, j)] = acc.total();
        for (std::size_t m = 0; m < 4; ++m) {
          for (std::size_t l = 0; l < 4; ++l) {
            acc.add(dginv[m][idx2(i, l)], lower[idx3(l, j, k)]);
            Terms<S> dl;
            dl.add(J.ddg[m][j][idx2(l, k)]);
            dl.add(J.ddg[m][k][idx2(l, j)]);
            dl.add(-J.ddg[m][l][idx2(j, k)]);
            const S d_lower = dl.total();
            if (!is_zero_s(d_lower)) acc.add(J.ginv[idx2(i, l)], half * d_lower);
          }
          dgamma[m][idx3(i, j, k)] = dgamma[m][idx3(i, k, j)] = acc.total();
        }
      }
    }
  }
  return dgamma;
}

template <class S>
void riemann(CurvatureTensors<S>& T, const std::array<std::array<S, 64>, 4>& dgamma) {
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      for (std::size_t k = 0; k < 4; ++k) {
        for (std::size_t l = k + 1; l < 4; ++l) {
          Terms<S> acc;
          acc.add(dgamma[k][idx3(i, l, j)]);
          acc.add(-dgamma[l][idx3(i, k, j)]);
          for (std::size_t m = 0; m < 4; ++m) {
            acc.add(T.gamma[idx3(i, k, m)], T.gamma[idx3(m, l, j)]);
            const S& a = T.gamma[idx3(i, l, m)];
            const S& b = T.gamma[idx3(m, k, j)];
            if (!is_zero_s(a) && !is_zero_s(b)) acc.add(-(a * b));
          }
          const S r = acc.total();
          T.riemann[idx4(i, j, k, l)] = r;
          T.riemann[idx4(i, j, l, k)] = -r;
        }
      }
    }
  }
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      for (std::size_t k = 0; k < 4; ++k) {
        for (std::size_t l = 0; l < 4; ++l) {
          Terms<S> acc;
          for (std::size_t m = 0; m < 4; ++m) acc.add(T.g[idx2(i, m)], T.riemann[idx4(m, j, k, l)]);
          T.riemann_down[idx4(i, j, k, l)] = acc.total();
        }
      }
    }
  }
}

template <class S>
void ricci_and_weyl(CurvatureTensors<S>& T) {
  for (std::size_t j = 0; j < 4; ++j) {
    for (std::size_t l = 0; l < 4; ++l) {
      Terms<S> acc;
      for (std::size_t i = 0; i < 4; ++i) acc.add(T.riemann[idx4(i, j, i, l)]);
      T.ricci[idx2(j, l)] = acc.total();
    }
  }
  {
    Terms<S> acc;
    for (std::size_t j = 0; j < 4; ++j) {
      for (std::size_t l = 0; l < 4; ++l) acc.add(T.ginv[idx2(j, l)], T.ricci[idx2(j, l)]);
    }
    T.scalar = acc.total();
  }
  const S half = ratio<S>(1, 2);
  const S sixth = ratio<S>(1, 6);
  const auto& g = T.g;
  const auto& Ric = T.ricci;
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t b = 0; b < 4; ++b) {
      for (std::size_t c = 0; c < 4; ++c) {
        for (std::size_t d = 0; d < 4; ++d) {
          Terms<S> ric;
          ric.add(g[idx2(a, c)], Ric[idx2(b, d)]);
          ric.add(-g[idx2(a, d)], Ric[idx2(b, c)]);
          ric.add(-g[idx2(b, c)], Ric[idx2(a, d)]);
          ric.add(g[idx2(b, d)], Ric[idx2(a, c)]);
          Terms<S> gg;
          gg.add(g[idx2(a, c)], g[idx2(b, d)]);
          gg.add(-g[idx2(a, d)], g[idx2(b, c)]);
          Terms<S> acc;
          acc.add(T.riemann_down[idx4(a, b, c, d)]);
          acc.add(-(half * ric.total()));
          acc.add(sixth * T.scalar, gg.total());
          T.weyl_down[idx4(a, b, c, d)] = acc.total();
        }
      }
    }
  }
  // Raise indices one at a time; the first raise gives C^a_bcd.
  std::array<S, 256> up = T.weyl_down;
  for (std::size_t slot = 0; slot < 4; ++slot) {
    std::array<S, 256> next{};
    for (std::size_t n = 0; n < 256; ++n) {
      std::array<std::size_t, 4> id = {n / 64, (n / 16) % 4, (n / 4) % 4, n % 4};
      Terms<S> acc;
      for (std::size_t e = 0; e < 4; ++e) {
        auto src = id;
        src[slot] = e;
        acc.add(T.ginv[idx2(id[slot], e)], up[idx4(src[0], src[1], src[2], src[3])]);
      }
      next[n] = acc.total();
    }
    up = next;
    if (slot == 0) T.weyl = up;
  }
  Terms<S> acc;
  for (std::size_t n = 0; n < 256; ++n) acc.add(T.weyl_down[n], up[n]);
  T.weyl_square = acc.total();
}

template <class S>
CurvatureTensors<S> curvature_core(const Jet2<S>& J) {
  CurvatureTensors<S> T;
  T.g = J.g;
  T.ginv = J.ginv;
  const auto dgamma = christoffel(J, T);
  riemann(T, dgamma);
  ricci_and_weyl(T);
  return T;
}

template <class Arr>
std::vector<Expr> flatten(const Arr& a) {
  return std::vector<Expr>(a.begin(), a.end());
}

std::vector<Expr> all_outputs(const CurvatureTensors<Expr>& T) {
  std::vector<Expr> out;
  auto push = [&](const auto& arr) { out.insert(out.end(), arr.begin(), arr.end()); };
  push(T.g);
  push(T.ginv);
  push(T.gamma);
  push(T.riemann);
  push(T.riemann_down);
  push(T.ricci);
  out.push_back(T.scalar);
  push(T.weyl);
  push(T.weyl_down);
  out.push_back(T.weyl_square);
  return out;
}

CurvatureValues unpack(const std::vector<double>& v) {
  CurvatureValues T;
  std::size_t k = 0;
  auto pull = [&](auto& arr) {
    for (auto& x : arr) x = v[k++];
  };
  pull(T.g);
  pull(T.ginv);
  pull(T.gamma);
  pull(T.riemann);
  pull(T.riemann_down);
  pull(T.ricci);
  T.scalar = v[k++];
  pull(T.weyl);
  pull(T.weyl_down);
  T.weyl_square = v[k++];
  return T;
}

// Cofactor inverse of a symmetric 4x4 Expr matrix.
std::array<Expr, 16> symbolic_inverse(const std::array<Expr, 16>& g) {
  auto minor3 = [&](std::size_t r, std::size_t c) {
    std::array<std::size_t, 3> rows{}, cols{};
    for (std::size_t i = 0, n = 0; i < 4; ++i) {
      if (i != r) rows[n++] = i;
    }
    for (std::size_t i = 0, n = 0; i < 4; ++i) {
      if (i != c) cols[n++] = i;
    }
    auto a = [&](std::size_t i, std::size_t j) { return g[idx2(rows[i], cols[j])]; };
    Terms<Expr> t;
    t.add(a(0, 0), a(1, 1), a(2, 2));
    t.add(a(0, 1), a(1, 2), a(2, 0));
    t.add(a(0, 2), a(1, 0), a(2, 1));
    t.add(-a(0, 2), a(1, 1), a(2, 0));
    t.add(-a(0, 0), a(1, 2), a(2, 1));
    t.add(-a(0, 1), a(1, 0), a(2, 2));
    return t.total();
  };
  std::array<Expr, 16> cof;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i; j < 4; ++j) {
      Expr m = minor3(i, j);
      cof[idx2(i, j)] = cof[idx2(j, i)] = (i + j) % 2 ? -m : m;
    }
  }
  Terms<Expr> d;
  for (std::size_t j = 0; j < 4; ++j) d.add(g[idx2(0, j)], cof[idx2(0, j)]);
  const Expr det = d.total();
  if (det.is_zero()) throw std::domain_error("metric is singular");
  std::array<Expr, 16> inv;
  for (std::size_t n = 0; n < 16; ++n) inv[n] = cof[n] / det;
  return inv;
}

}  // namespace

struct CurvatureReport::Impl {
  std::unique_ptr<Tape> tape;  // symbolic outputs, or the metric 2-jet
};

CurvatureReport::~CurvatureReport() = default;
CurvatureReport::CurvatureReport(CurvatureReport&&) noexcept = default;
CurvatureReport& CurvatureReport::operator=(CurvatureReport&&) noexcept = default;

CurvatureReport::CurvatureReport(const Metric4& g, const CurvatureOptions& opt)
    : metric_(g), impl_(std::make_unique<Impl>()) {
  const Chart& chart = g.chart();
  Jet2<Expr> J;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) J.g[idx2(i, j)] = g.at(i, j);
  }
  for (std::size_t m = 0; m < 4; ++m) {
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = i; j < 4; ++j) {
        J.dg[m][idx2(i, j)] = J.dg[m][idx2(j, i)] = differentiate(J.g[idx2(i, j)], chart.name(m));
      }
    }
  }
  for (std::size_t m = 0; m < 4; ++m) {
    for (std::size_t n = m; n < 4; ++n) {
      for (std::size_t k = 0; k < 16; ++k) {
        J.ddg[m][n][k] = J.ddg[n][m][k] = differentiate(J.dg[m][k], chart.name(n));
      }
    }
  }

  bool symbolic = !opt.force_numeric && g.numeric_factors().empty();
  if (symbolic) {
    try {
      J.ginv = symbolic_inverse(J.g);
      CurvatureTensors<Expr> T;
      T.g = J.g;
      T.ginv = J.ginv;
      const auto dgamma = christoffel(J, T);
      std::vector<Expr> stage = flatten(T.gamma);
      for (const auto& d : dgamma) stage.insert(stage.end(), d.begin(), d.end());
      if (node_count(stage) > opt.node_budget) throw std::length_error("budget");
      riemann(T, dgamma);
      if (node_count(flatten(T.riemann_down)) > opt.node_budget) throw std::length_error("budget");
      ricci_and_weyl(T);
      const auto outs = all_outputs(T);
      if (node_count(outs) > opt.node_budget) throw std::length_error("budget");
      std::vector<std::string> inputs = chart.names();
      for (const auto& v : free_variables(outs)) {
        if (chart.index_of(v) < 0) inputs.push_back(v);
      }
      impl_->tape = std::make_unique<Tape>(outs, inputs);
      symbolic_ = std::move(T);
    } catch (const std::length_error&) {
      symbolic = false;
    }
  }
  if (!symbolic) {
    std::vector<Expr> outs;
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = i; j < 4; ++j) outs.push_back(J.g[idx2(i, j)]);
    }
    for (std::size_t m = 0; m < 4; ++m) {
      for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = i; j < 4; ++j) outs.push_back(J.dg[m][idx2(i, j)]);
      }
    }
    for (std::size_t m = 0; m < 4; ++m) {
      for (std::size_t n = m; n < 4; ++n) {
        for (std::size_t i = 0; i < 4; ++i) {
          for (std::size_t j = i; j < 4; ++j) outs.push_back(J.ddg[m][n][idx2(i, j)]);
        }
      }
    }
    std::vector<std::string> inputs = chart.names();
    for (const auto& v : free_variables(outs)) {
      if (chart.index_of(v) < 0) inputs.push_back(v);
    }
    impl_->tape = std::make_unique<Tape>(outs, inputs);
  }
}

CurvatureValues CurvatureReport::at(const EvalPoint& pt) const {
  std::vector<double> out;
  const auto st = impl_->tape->run(pt, out);
  if (!st.ok) throw EvalError(std::string("curvature evaluation failed: ") + st.error);
  if (symbolic_) return unpack(out);

  std::array<double, 16> g{};
  std::array<std::array<double, 16>, 4> dg{};
  std::array<std::array<std::array<double, 16>, 4>, 4> ddg{};
  std::size_t k = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i; j < 4; ++j, ++k) g[idx2(i, j)] = g[idx2(j, i)] = out[k];
  }
  for (std::size_t m = 0; m < 4; ++m) {
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = i; j < 4; ++j, ++k) dg[m][idx2(i, j)] = dg[m][idx2(j, i)] = out[k];
    }
  }
  for (std::size_t m = 0; m < 4; ++m) {
    for (std::size_t n = m; n < 4; ++n) {
      for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = i; j < 4; ++j, ++k) {
          ddg[m][n][idx2(i, j)] = ddg[m][n][idx2(j, i)] = out[k];
          ddg[n][m][idx2(i, j)] = ddg[n][m][idx2(j, i)] = out[k];
        }
      }
    }
  }
  // e^{2 phi} g0 and its derivatives for every numeric factor, innermost first.
  for (const auto& factor : metric_.numeric_factors()) {
    const ScalarJet f = factor(pt);
    const double E = std::exp(2.0 * f.value);
    std::array<std::array<std::array<double, 16>, 4>, 4> nddg{};
    std::array<std::array<double, 16>, 4> ndg{};
    for (std::size_t a = 0; a < 16; ++a) {
      for (std::size_t m = 0; m < 4; ++m) {
        ndg[m][a] = E * (2.0 * f.d[m] * g[a] + dg[m][a]);
        for (std::size_t n = 0; n < 4; ++n) {
          nddg[m][n][a] = E * ((4.0 * f.d[m] * f.d[n] + 2.0 * f.dd[m][n]) * g[a] + 2.0 * f.d[m] * dg[n][a] +
                               2.0 * f.d[n] * dg[m][a] + ddg[m][n][a]);
        }
      }
    }
    for (auto& v : g) v *= E;
    dg = ndg;
    ddg = nddg;
  }
  return curvature_from_jet(g, dg, ddg);
}

CurvatureValues curvature_from_jet(const std::array<double, 16>& g, const std::array<std::array<double, 16>, 4>& dg,
                                   const std::array<std::array<std::array<double, 16>, 4>, 4>& ddg) {
  Jet2<double> J;
  J.g = g;
  J.dg = dg;
  J.ddg = ddg;
  Eigen::Matrix4d m;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) m(i, j) = g[idx2(static_cast<std::size_t>(i), static_cast<std::size_t>(j))];
  }
  Eigen::FullPivLU<Eigen::Matrix4d> lu(m);
  if (!lu.isInvertible() || std::abs(lu.determinant()) < 1e-300) throw EvalError("metric is singular at the point");
  const Eigen::Matrix4d inv = lu.inverse();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) J.ginv[idx2(static_cast<std::size_t>(i), static_cast<std::size_t>(j))] = inv(i, j);
  }
  return curvature_core(J);
}

Report curvature_identity_checks(const CurvatureReport& c, const std::vector<EvalPoint>& pts, double tol) {
  double antisym = 0, pair = 0, bianchi = 0, ric_sym = 0, trace = 0;
  double scale_r = 1e-300, scale_c = 1e-300;
  for (const auto& pt : pts) {
    const auto T = c.at(pt);
    const auto& R = T.riemann_down;
    scale_r = std::max(scale_r, max_abs(R));
    scale_c = std::max(scale_c, max_abs(T.weyl_down));
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j) {
        ric_sym = std::max(ric_sym, std::abs(T.ricci[idx2(i, j)] - T.ricci[idx2(j, i)]));
        for (std::size_t k = 0; k < 4; ++k) {
          for (std::size_t l = 0; l < 4; ++l) {
            const double r = R[idx4(i, j, k, l)];
            antisym = std::max({antisym, std::abs(r + R[idx4(j, i, k, l)]), std::abs(r + R[idx4(i, j, l, k)])});
            pair = std::max(pair, std::abs(r - R[idx4(k, l, i, j)]));
            bianchi = std::max(bianchi, std::abs(r + R[idx4(i, k, l, j)] + R[idx4(i, l, j, k)]));
          }
        }
      }
    }
    // Weyl traces: contract the upper index with each lower one.
    for (std::size_t a = 0; a < 4; ++a) {
      for (std::size_t b = 0; b < 4; ++b) {
        double t1 = 0, t2 = 0, t3 = 0;
        for (std::size_t i = 0; i < 4; ++i) {
          t1 += T.weyl[idx4(i, i, a, b)];
          t2 += T.weyl[idx4(i, a, i, b)];
          t3 += T.weyl[idx4(i, a, b, i)];
        }
        trace = std::max({trace, std::abs(t1), std::abs(t2), std::abs(t3)});
      }
    }
  }
  Report r;
  r.title = "curvature identities";
  const double sr = std::max(1.0, scale_r);
  const double sc = std::max(1.0, scale_c);
  r.add(bound_check("R_ijkl antisymmetry", antisym / sr, tol));
  r.add(bound_check("R_ijkl pair symmetry", pair / sr, tol));
  r.add(bound_check("first Bianchi", bianchi / sr, tol));
  r.add(bound_check("Ricci symmetry", ric_sym / sr, tol));
  r.add(bound_check("Weyl trace-free", trace / sc, tol));
  return r;
}

double christoffel_fd_residual(const CurvatureReport& c, const EvalPoint& pt, double step) {
  const Metric4& g = c.metric();
  const auto T = c.at(pt);
  std::array<std::array<double, 16>, 4> dg{};
  for (std::size_t m = 0; m < 4; ++m) {
    EvalPoint hi = pt, lo = pt;
    hi[g.chart().name(m)] += step;
    lo[g.chart().name(m)] -= step;
    const auto Th = c.at(hi);
    const auto Tl = c.at(lo);
    for (std::size_t a = 0; a < 16; ++a) dg[m][a] = (Th.g[a] - Tl.g[a]) / (2.0 * step);
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      for (std::size_t k = 0; k < 4; ++k) {
        double fd = 0.0;
        for (std::size_t l = 0; l < 4; ++l) {
          fd += 0.5 * T.ginv[idx2(i, l)] * (dg[j][idx2(l, k)] + dg[k][idx2(l, j)] - dg[l][idx2(j, k)]);
        }
        const double exact = T.gamma[idx3(i, j, k)];
        worst = std::max(worst, std::abs(exact - fd) / std::max(1.0, std::abs(exact)));
      }
    }
  }
  return worst;
}

std::pair<int, int> signature(const Metric4& g, const EvalPoint& pt) {
  Eigen::Matrix4d m;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) m(static_cast<int>(i), static_cast<int>(j)) = evaluate(g.at(i, j), pt);
  }
  double scale = 1.0;
  for (const auto& f : g.numeric_factors()) scale *= std::exp(2.0 * f(pt).value);
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(scale * m, Eigen::EigenvaluesOnly);
  int pos = 0, neg = 0;
  const double tiny = 1e-12 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  for (int i = 0; i < 4; ++i) {
    if (es.eigenvalues()(i) > tiny) ++pos;
    if (es.eigenvalues()(i) < -tiny) ++neg;
  }
  return {pos, neg};
}

double max_abs(const std::array<double, 256>& t) {
  double m = 0;
  for (double v : t) m = std::max(m, std::abs(v));
  return m;
}
double max_abs(const std::array<double, 16>& t) {
  double m = 0;
  for (double v : t) m = std::max(m, std::abs(v));
  return m;
}
double max_abs(const std::array<double, 64>& t) {
  double m = 0;
  for (double v : t) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace paracr
