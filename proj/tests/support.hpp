#pragma once

#include <cmath>
#include <random>
#include <string>
#include <utility>

#include "paracr/expr.hpp"

namespace paracr::testing {

// Random expression over {x, y, z} built from every node kind.
inline Expr random_expr(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 10);
  const char* names[] = {"x", "y", "z"};
  switch (pick(rng)) {
    case 0:
      return Expr(Rational(static_cast<std::int64_t>(rng() % 7) - 3, static_cast<std::int64_t>(rng() % 3) + 1));
    case 1:
    case 2:
      return var(names[rng() % 3]);
    case 3:
      return random_expr(rng, depth - 1) + random_expr(rng, depth - 1);
    case 4:
      return random_expr(rng, depth - 1) - random_expr(rng, depth - 1);
    case 5:
      return random_expr(rng, depth - 1) * random_expr(rng, depth - 1);
    case 6:
      return random_expr(rng, depth - 1) / (Expr(3) + pow(random_expr(rng, depth - 1), 2));
    case 7:
      return pow(random_expr(rng, depth - 1), static_cast<int>(rng() % 5) - 1 == 0 ? 2 : 3);
    case 8:
      return sin(random_expr(rng, depth - 1));
    case 9:
      return exp(random_expr(rng, depth - 1) / Expr(4));
    default:
      return -random_expr(rng, depth - 1);
  }
}

inline double pw(double b, int e) { return std::pow(b, e); }

// Second, independent keying of the (1,1,1) numerators straight from the
// typeset formulas, evaluated in plain double arithmetic. J carries the same
// two repairs as the library (p_x1 once; (p_x1 + p p_y1) on p_1111).
inline std::pair<double, double> jk_oracle(const Expr& P, const EvalPoint& pt) {
  auto D = [&](const std::string& name) {
    Expr e = P;
    for (char c : name.substr(1)) e = differentiate(e, c == 'x' ? "x" : c == 'y' ? "y" : "a1");
    return evaluate(e, pt);
  };
  const double p = D("p");
  const double p1 = D("p1");
  const double px = D("px");
  const double py = D("py");
  const double p11 = D("p11");
  const double px1 = D("px1");
  const double pxx = D("pxx");
  const double pxy = D("pxy");
  const double py1 = D("py1");
  const double pyy = D("pyy");
  const double p111 = D("p111");
  const double px11 = D("px11");
  const double pxx1 = D("pxx1");
  const double pxy1 = D("pxy1");
  const double pxyy = D("pxyy");
  const double py11 = D("py11");
  const double pyy1 = D("pyy1");
  const double pyyy = D("pyyy");
  const double p1111 = D("p1111");
  const double px111 = D("px111");
  const double pxx11 = D("pxx11");
  const double pxxx1 = D("pxxx1");
  const double pxxy1 = D("pxxy1");
  const double pxy11 = D("pxy11");
  const double pxyy1 = D("pxyy1");
  const double py111 = D("py111");
  const double pyy11 = D("pyy11");
  const double pyyy1 = D("pyyy1");
  const double px1111 = D("px1111");
  const double pxxx11 = D("pxxx11");
  const double pxxy11 = D("pxxy11");
  const double pxyy11 = D("pxyy11");
  const double py1111 = D("py1111");
  const double pyyy11 = D("pyyy11");
  const double J =
      -15*pw(p11,3)*px1+10*p1*p11*p111*px1+15*p1*pw(p11,2)*px11-4*pw(p1,2)*p111*px11
      +12*pw(p1,2)*pw(p11,2)*py1-15*p*pw(p11,3)*py1-4*pw(p1,3)*p111*py1+10*p*p1*p11*p111*py1
      -12*pw(p1,3)*p11*py11+15*p*p1*pw(p11,2)*py11-4*p*pw(p1,2)*p111*py11-6*pw(p1,2)*p11*px111
      +4*pw(p1,2)*(pw(p1,2)-1.5*p*p11)*py111-pw(p1,2)*(px1+p*py1)*p1111+pw(p1,3)*(px1111+p*py1111);
  const double K =
      -15*p11*pw(px1,3)+15*p1*pw(px1,2)*px11+10*p1*p11*px1*pxx1-4*pw(p1,2)*px11*pxx1-6*pw(p1,2)*px1*pxx11
      -pw(p1,2)*p11*pxxx1+pw(p1,3)*pxxx11-2*pw(p1,4)*pxxy1-3*p*pw(p1,2)*p11*pxxy1+3*p*pw(p1,3)*pxxy11
      -pw(p1,2)*p11*px1*pxy+pw(p1,3)*px11*pxy-3*pw(p1,2)*p11*px*pxy1+6*pw(p1,3)*px1*pxy1
      +20*p*p1*p11*px1*pxy1-8*p*pw(p1,2)*px11*pxy1+3*pw(p1,3)*px*pxy11-12*p*pw(p1,2)*px1*pxy11
      +2*pw(p1,5)*pxyy-4*p*pw(p1,4)*pxyy1-3*pw(p,2)*pw(p1,2)*p11*pxyy1+3*pw(p,2)*pw(p1,3)*pxyy11
      +10*p1*p11*pw(px1,2)*py-10*pw(p1,2)*px1*px11*py-3*pw(p1,2)*p11*pxx1*py+3*pw(p1,3)*pxx11*py
      -6*pw(p1,4)*pxy1*py-9*p*pw(p1,2)*p11*pxy1*py+9*p*pw(p1,3)*pxy11*py-2*pw(p1,2)*p11*px1*pw(py,2)
      +2*pw(p1,3)*px11*pw(py,2)+10*p1*p11*px*px1*py1-6*pw(p1,2)*pw(px1,2)*py1-45*p*p11*pw(px1,2)*py1
      -4*pw(p1,2)*px*px11*py1+30*p*p1*px1*px11*py1-pw(p1,2)*p11*pxx*py1+2*pw(p1,3)*pxx1*py1
      +10*p*p1*p11*pxx1*py1-6*p*pw(p1,2)*pxx11*py1-2*pw(p1,4)*pxy*py1-3*p*pw(p1,2)*p11*pxy*py1
      +10*p*pw(p1,3)*pxy1*py1+20*pw(p,2)*p1*p11*pxy1*py1-12*pw(p,2)*pw(p1,2)*pxy11*py1
      -4*pw(p1,2)*p11*px*py*py1+8*pw(p1,3)*px1*py*py1+30*p*p1*p11*px1*py*py1-14*p*pw(p1,2)*px11*py*py1
      -4*pw(p1,4)*pw(py,2)*py1-6*p*pw(p1,2)*p11*pw(py,2)*py1+2*pw(p1,3)*px*pw(py1,2)
      +10*p*p1*p11*px*pw(py1,2)-12*p*pw(p1,2)*px1*pw(py1,2)-45*pw(p,2)*p11*px1*pw(py1,2)
      +15*pw(p,2)*p1*px11*pw(py1,2)+10*p*pw(p1,3)*py*pw(py1,2)+20*pw(p,2)*p1*p11*py*pw(py1,2)
      -6*pw(p,2)*pw(p1,2)*pw(py1,3)-15*pw(p,3)*p11*pw(py1,3)-6*pw(p1,2)*px*px1*py11+15*p*p1*pw(px1,2)*py11
      +pw(p1,3)*pxx*py11-4*p*pw(p1,2)*pxx1*py11+3*p*pw(p1,3)*pxy*py11-8*pw(p,2)*pw(p1,2)*pxy1*py11
      +4*pw(p1,3)*px*py*py11-16*p*pw(p1,2)*px1*py*py11+6*p*pw(p1,3)*pw(py,2)*py11
      -10*p*pw(p1,2)*px*py1*py11+30*pw(p,2)*p1*px1*py1*py11-20*pw(p,2)*pw(p1,2)*py*py1*py11
      +15*pw(p,3)*p1*pw(py1,2)*py11-2*pw(p1,4)*px1*pyy-p*pw(p1,2)*p11*px1*pyy+p*pw(p1,3)*px11*pyy
      +4*pw(p1,5)*py*pyy-4*p*pw(p1,4)*py1*pyy-2*pw(p,2)*pw(p1,2)*p11*py1*pyy+2*pw(p,2)*pw(p1,3)*py11*pyy
      -2*pw(p1,4)*px*pyy1-3*p*pw(p1,2)*p11*px*pyy1+6*p*pw(p1,3)*px1*pyy1+10*pw(p,2)*p1*p11*px1*pyy1
      -4*pw(p,2)*pw(p1,2)*px11*pyy1-8*p*pw(p1,4)*py*pyy1-6*pw(p,2)*pw(p1,2)*p11*py*pyy1
      +8*pw(p,2)*pw(p1,3)*py1*pyy1+10*pw(p,3)*p1*p11*py1*pyy1-4*pw(p,3)*pw(p1,2)*py11*pyy1
      +3*p*pw(p1,3)*px*pyy11-6*pw(p,2)*pw(p1,2)*px1*pyy11+6*pw(p,2)*pw(p1,3)*py*pyy11
      -6*pw(p,3)*pw(p1,2)*py1*pyy11+2*p*pw(p1,5)*pyyy-2*pw(p,2)*pw(p1,4)*pyyy1-pw(p,3)*pw(p1,2)*p11*pyyy1
      +pw(p,3)*pw(p1,3)*pyyy11;
  return {J, K};
}


}  // namespace paracr::testing
