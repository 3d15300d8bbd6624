#pragma once

// Bounded scalar minimization: Brent's method with golden-section fallback.

#include <cmath>
#include <limits>

namespace permod::optim {

struct ScalarResult {
  double x = 0.0;
  double fx = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Minimizes f on [lo, hi] to absolute tolerance xatol.
template <class F>
ScalarResult brent_bounded(F &&f, double lo, double hi, double xatol = 1e-5,
                           int max_evaluations = 500) {
  const double sqrt_eps = std::sqrt(std::numeric_limits<double>::epsilon());
  const double golden_mean = 0.5 * (3.0 - std::sqrt(5.0));
  double a = lo, b = hi;
  double fulc = a + golden_mean * (b - a);
  double nfc = fulc, xf = fulc;
  double rat = 0.0, e = 0.0;
  double fx = f(xf);
  int num = 1;
  double ffulc = fx, fnfc = fx;
  double xm = 0.5 * (a + b);
  double tol1 = sqrt_eps * std::abs(xf) + xatol / 3.0;
  double tol2 = 2.0 * tol1;
  bool converged = true;

  while (std::abs(xf - xm) > tol2 - 0.5 * (b - a)) {
    bool golden = true;
    if (std::abs(e) > tol1) {
      golden = false;
      double r = (xf - nfc) * (fx - ffulc);
      double q = (xf - fulc) * (fx - fnfc);
      double p = (xf - fulc) * q - (xf - nfc) * r;
      q = 2.0 * (q - r);
      if (q > 0.0)
        p = -p;
      q = std::abs(q);
      r = e;
      e = rat;
      if (std::abs(p) < std::abs(0.5 * q * r) && p > q * (a - xf) &&
          p < q * (b - xf)) {
        rat = p / q;
        const double x = xf + rat;
        if (x - a < tol2 || b - x < tol2)
          rat = xm - xf >= 0.0 ? tol1 : -tol1;
      } else {
        golden = true;
      }
    }
    if (golden) {
      e = xf >= xm ? a - xf : b - xf;
      rat = golden_mean * e;
    }
    const double si = rat >= 0.0 ? 1.0 : -1.0;
    const double x = xf + si * std::max(std::abs(rat), tol1);
    const double fu = f(x);
    ++num;
    if (fu <= fx) {
      if (x >= xf)
        a = xf;
      else
        b = xf;
      fulc = nfc;
      ffulc = fnfc;
      nfc = xf;
      fnfc = fx;
      xf = x;
      fx = fu;
    } else {
      if (x < xf)
        a = x;
      else
        b = x;
      if (fu <= fnfc || nfc == xf) {
        fulc = nfc;
        ffulc = fnfc;
        nfc = x;
        fnfc = fu;
      } else if (fu <= ffulc || fulc == xf || fulc == nfc) {
        fulc = x;
        ffulc = fu;
      }
    }
    xm = 0.5 * (a + b);
    tol1 = sqrt_eps * std::abs(xf) + xatol / 3.0;
    tol2 = 2.0 * tol1;
    if (num >= max_evaluations) {
      converged = false;
      break;
    }
  }
  return {xf, fx, num, converged};
}

} // namespace permod::optim
