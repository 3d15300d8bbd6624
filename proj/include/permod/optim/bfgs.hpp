#pragma once

// Quasi-Newton (BFGS) minimization with central-difference gradients and a
// backtracking Armijo line search. Intended for a handful of parameters.

#include <algorithm>
#include <cmath>
#include <vector>

namespace permod::optim {

struct BfgsOptions {
  double gtol = 1e-5;
  int max_iterations = 200;
  double fd_step = 1e-6; ///< relative finite-difference step
  double max_step = 0.0; ///< cap on the inf-norm of each search direction; 0 = none
};

struct BfgsResult {
  std::vector<double> x;
  double fx = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

template <class F>
BfgsResult bfgs(F &&f, std::vector<double> x0, const BfgsOptions &opt = {}) {
  const std::size_t n = x0.size();
  int evals = 0;
  const auto eval = [&](const std::vector<double> &x) {
    ++evals;
    return f(x);
  };
  const auto gradient = [&](std::vector<double> x) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double xi = x[i];
      const double h = opt.fd_step * std::max(1.0, std::abs(xi));
      x[i] = xi + h;
      const double fp = eval(x);
      x[i] = xi - h;
      const double fm = eval(x);
      x[i] = xi;
      g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
  };
  const auto norm_inf = [](const std::vector<double> &v) {
    double m = 0.0;
    for (double e : v)
      m = std::max(m, std::abs(e));
    return m;
  };

  // Inverse Hessian approximation, row-major.
  std::vector<double> H(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    H[i * n + i] = 1.0;

  std::vector<double> x = std::move(x0);
  double fx = eval(x);
  std::vector<double> g = gradient(x);
  BfgsResult res;
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    if (!(norm_inf(g) > opt.gtol)) {
      res.converged = true;
      break;
    }
    std::vector<double> p(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        p[i] -= H[i * n + j] * g[j];
    double slope = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      slope += p[i] * g[i];
    if (!(slope < 0.0)) {
      // Lost descent: restart from steepest descent.
      std::fill(H.begin(), H.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        H[i * n + i] = 1.0;
        p[i] = -g[i];
      }
      slope = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        slope -= g[i] * g[i];
    }

    if (opt.max_step > 0.0) {
      const double len = norm_inf(p);
      if (len > opt.max_step) {
        for (auto &e : p)
          e *= opt.max_step / len;
        slope *= opt.max_step / len;
      }
    }

    double step = 1.0;
    std::vector<double> xn(n);
    double fn = fx;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < n; ++i)
        xn[i] = x[i] + step * p[i];
      fn = eval(xn);
      if (std::isfinite(fn) && fn <= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted)
      break;

    std::vector<double> gn = gradient(xn);
    std::vector<double> s(n), y(n);
    double sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = xn[i] - x[i];
      y[i] = gn[i] - g[i];
      sy += s[i] * y[i];
    }
    x = xn;
    fx = fn;
    g = gn;
    if (sy > 1e-300) {
      if (it == 0) {
        // Scale the initial inverse Hessian to the observed curvature.
        double yy = 0.0;
        for (double e : y)
          yy += e * e;
        for (std::size_t i = 0; i < n; ++i)
          H[i * n + i] = sy / yy;
      }
      std::vector<double> Hy(n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          Hy[i] += H[i * n + j] * y[j];
      double yHy = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        yHy += y[i] * Hy[i];
      const double rho = 1.0 / sy;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          H[i * n + j] += (1.0 + yHy * rho) * rho * s[i] * s[j] -
                          rho * (Hy[i] * s[j] + s[i] * Hy[j]);
    }
  }
  if (!res.converged && !(norm_inf(g) > opt.gtol))
    res.converged = true;
  res.x = std::move(x);
  res.fx = fx;
  res.iterations = it;
  res.evaluations = evals;
  return res;
}

} // namespace permod::optim
