#pragma once

// Levenberg-Marquardt nonlinear least squares for small dense problems.
// Jacobians come from forward differences; damping follows Nielsen's rule
// with Marquardt's diagonal scaling.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace permod::optim {

struct LmOptions {
  double ftol = 1.49012e-8;
  double xtol = 1.49012e-8;
  double gtol = 0.0;
  int max_evaluations = 2000;
  double fd_step = 1.49012e-8;
};

struct LmResult {
  std::vector<double> x;
  double cost = 0.0; ///< sum of squared residuals
  int evaluations = 0;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

/// Solves A x = b (n x n, row-major) by Gaussian elimination with partial
/// pivoting. Returns nullopt when A is numerically singular.
inline std::optional<std::vector<double>> solve_dense(std::vector<double> A,
                                                      std::vector<double> b) {
  const std::size_t n = b.size();
  double scale = 0.0;
  for (double v : A)
    scale = std::max(scale, std::abs(v));
  const double tiny = scale * 1e-14 + std::numeric_limits<double>::min();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(A[i * n + k]) > std::abs(A[piv * n + k]))
        piv = i;
    if (std::abs(A[piv * n + k]) <= tiny)
      return std::nullopt;
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j)
        std::swap(A[k * n + j], A[piv * n + j]);
      std::swap(b[k], b[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double m = A[i * n + k] / A[k * n + k];
      for (std::size_t j = k; j < n; ++j)
        A[i * n + j] -= m * A[k * n + j];
      b[i] -= m * b[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t k = n; k-- > 0;) {
    double s = b[k];
    for (std::size_t j = k + 1; j < n; ++j)
      s -= A[k * n + j] * x[j];
    x[k] = s / A[k * n + k];
  }
  return x;
}

} // namespace detail

/// Minimizes sum r_i(x)^2. R maps a parameter vector to a residual vector.
template <class R>
LmResult levenberg_marquardt(R &&residuals, std::vector<double> x0,
                             const LmOptions &opt = {}) {
  const std::size_t n = x0.size();
  int evals = 0;
  const auto eval = [&](const std::vector<double> &x) {
    ++evals;
    return residuals(x);
  };
  const auto sumsq = [](const std::vector<double> &r) {
    double s = 0.0;
    for (double v : r)
      s += v * v;
    return s;
  };

  std::vector<double> x = std::move(x0);
  std::vector<double> r = eval(x);
  const std::size_t m = r.size();
  double cost = sumsq(r);
  double lambda = -1.0;
  double nu = 2.0;
  LmResult res;
  int it = 0;

  while (evals < opt.max_evaluations) {
    ++it;
    // Forward-difference Jacobian, column by column.
    std::vector<double> J(m * n);
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<double> xp = x;
      const double h = opt.fd_step * (x[j] != 0.0 ? std::abs(x[j]) : 1.0);
      xp[j] += h;
      const std::vector<double> rp = eval(xp);
      for (std::size_t i = 0; i < m; ++i)
        J[i * n + j] = (rp[i] - r[i]) / h;
    }
    std::vector<double> JtJ(n * n, 0.0), Jtr(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t a = 0; a < n; ++a) {
        Jtr[a] += J[i * n + a] * r[i];
        for (std::size_t b = 0; b < n; ++b)
          JtJ[a * n + b] += J[i * n + a] * J[i * n + b];
      }
    double gnorm = 0.0;
    for (double v : Jtr)
      gnorm = std::max(gnorm, std::abs(v));
    if (gnorm <= opt.gtol) {
      res.converged = true;
      break;
    }
    if (lambda < 0.0) {
      double dmax = 0.0;
      for (std::size_t a = 0; a < n; ++a)
        dmax = std::max(dmax, JtJ[a * n + a]);
      lambda = 1e-3 * dmax;
    }

    bool improved = false;
    bool done = false;
    while (evals < opt.max_evaluations) {
      std::vector<double> A = JtJ;
      for (std::size_t a = 0; a < n; ++a)
        A[a * n + a] += lambda * std::max(JtJ[a * n + a], 1e-300);
      std::vector<double> rhs(n);
      for (std::size_t a = 0; a < n; ++a)
        rhs[a] = -Jtr[a];
      const auto delta = detail::solve_dense(A, rhs);
      if (!delta) {
        lambda *= nu;
        nu *= 2.0;
        continue;
      }
      std::vector<double> xn(n);
      double dnorm = 0.0, xnorm = 0.0;
      for (std::size_t a = 0; a < n; ++a) {
        xn[a] = x[a] + (*delta)[a];
        dnorm += (*delta)[a] * (*delta)[a];
        xnorm += x[a] * x[a];
      }
      const std::vector<double> rn = eval(xn);
      const double cn = sumsq(rn);
      // Predicted reduction of the linearized model.
      double pred = 0.0;
      for (std::size_t a = 0; a < n; ++a)
        pred += (*delta)[a] * (lambda * std::max(JtJ[a * n + a], 1e-300) * (*delta)[a] -
                               Jtr[a]);
      const double rho = pred > 0.0 ? (cost - cn) / pred : -1.0;
      if (std::isfinite(cn) && rho > 0.0) {
        const double rel = (cost - cn) / std::max(cost, 1e-300);
        x = xn;
        r = rn;
        cost = cn;
        lambda *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
        nu = 2.0;
        improved = true;
        if (rel <= opt.ftol || std::sqrt(dnorm) <= opt.xtol * (std::sqrt(xnorm) + opt.xtol))
          done = true;
        break;
      }
      lambda *= nu;
      nu *= 2.0;
      if (std::sqrt(dnorm) <= opt.xtol * (std::sqrt(xnorm) + opt.xtol)) {
        done = true;
        break;
      }
    }
    if (done) {
      res.converged = true;
      break;
    }
    if (!improved)
      break;
  }
  res.x = std::move(x);
  res.cost = cost;
  res.evaluations = evals;
  res.iterations = it;
  return res;
}

} // namespace permod::optim
