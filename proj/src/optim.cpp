#include "pvkit/optim.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>

namespace pvkit {

double golden_section_max(const std::function<double(double)>& f, double lo,
                          double hi, double tol) {
  constexpr double invphi = 0.6180339887498948482;  // 1/phi
  double a = lo, b = hi;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

namespace {

using Objective = std::function<double(std::span<const double>)>;

std::vector<double> numeric_gradient(const Objective& f,
                                     std::vector<double>& x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    const double step = h * std::max(1.0, std::fabs(xi));
    x[i] = xi + step;
    const double fp = f(x);
    x[i] = xi - step;
    const double fm = f(x);
    x[i] = xi;
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

}  // namespace

BfgsResult bfgs_max(const Objective& f, std::vector<double> x0,
                    const BfgsOptions& opts) {
  const std::size_t n = x0.size();
  BfgsResult res;
  res.x = std::move(x0);
  res.value = f(res.x);
  if (!std::isfinite(res.value)) return res;
  res.trace.push_back(res.value);

  // Inverse Hessian approximation, identity-initialized.
  std::vector<double> hinv(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) hinv[i * n + i] = 1.0;

  std::vector<double> grad = numeric_gradient(f, res.x, opts.fd_step);

  for (std::size_t iter = 0; iter < opts.max_iterations; ++iter) {
    res.iterations = iter + 1;
    double gnorm = 0.0;
    for (double g : grad) gnorm += g * g;
    gnorm = std::sqrt(gnorm);
    if (gnorm < opts.gradient_tol) {
      res.converged = true;
      return res;
    }

    // Ascent direction d = Hinv * grad.
    std::vector<double> d(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i] += hinv[i * n + j] * grad[j];

    double dir_deriv = 0.0;
    for (std::size_t i = 0; i < n; ++i) dir_deriv += d[i] * grad[i];
    if (dir_deriv <= 0.0) {
      // Approximation lost positive definiteness; reset to steepest ascent.
      d = grad;
      dir_deriv = gnorm * gnorm;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          hinv[i * n + j] = (i == j) ? 1.0 : 0.0;
    }

    // Armijo backtracking.
    double step = 1.0;
    std::vector<double> xnew(n);
    double fnew = -std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < n; ++i) xnew[i] = res.x[i] + step * d[i];
      fnew = f(xnew);
      if (std::isfinite(fnew) &&
          fnew >= res.value + 1e-4 * step * dir_deriv) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      res.converged = gnorm < 1e-5;
      return res;
    }

    std::vector<double> gnew = numeric_gradient(f, xnew, opts.fd_step);

    // BFGS update on the inverse Hessian (maximization: use y = g_old - g_new
    // so the curvature condition mirrors the minimization form).
    std::vector<double> s(n), y(n);
    double sy = 0.0;
    double snorm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = xnew[i] - res.x[i];
      y[i] = grad[i] - gnew[i];
      sy += s[i] * y[i];
      snorm += s[i] * s[i];
    }
    if (sy > 1e-12) {
      const double rho = 1.0 / sy;
      // Hinv = (I - rho s y^T) Hinv (I - rho y s^T) + rho s s^T
      std::vector<double> hy(n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) hy[i] += hinv[i * n + j] * y[j];
      double yhy = 0.0;
      for (std::size_t i = 0; i < n; ++i) yhy += y[i] * hy[i];
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          hinv[i * n + j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] -
                                    hy[i] * s[j] - s[i] * hy[j]);
        }
      }
    }

    res.x = std::move(xnew);
    res.value = fnew;
    res.trace.push_back(fnew);
    grad = std::move(gnew);

    if (std::sqrt(snorm) < opts.step_tol) {
      res.converged = true;
      return res;
    }
  }
  return res;
}

}  // namespace pvkit
