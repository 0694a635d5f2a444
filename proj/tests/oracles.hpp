// Test-only oracles, written independently of the library implementation
// paths they check.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracle {

// Adaptive Simpson quadrature.
inline double simpson(const std::function<double(double)>& f, double a,
                      double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f,
                                   double a, double b, double fa, double fm,
                                   double fb, double whole, double tol,
                                   int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(f, a, m, fa, flm, fm);
  const double right = simpson(f, m, b, fm, frm, fb);
  if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol,
                              depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol,
                              depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double tol = 1e-12, int depth = 40) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  return adaptive_simpson_rec(f, a, b, fa, fm, fb, simpson(f, a, b, fa, fm, fb),
                              tol, depth);
}

struct GammaComp {
  double shape, rate, weight;
};

// Unnormalized posterior density of lambda for a gamma-mixture prior and a
// Poisson(lambda * e) observation, evaluated through logs for stability.
inline double posterior_density(const std::vector<GammaComp>& prior,
                                std::int64_t n, double e, double lambda) {
  if (lambda <= 0.0) return 0.0;
  double total = 0.0;
  for (const auto& c : prior) {
    if (c.weight <= 0.0) continue;
    const double log_prior = c.shape * std::log(c.rate) - std::lgamma(c.shape) +
                             (c.shape - 1.0) * std::log(lambda) -
                             c.rate * lambda;
    const double log_pois = static_cast<double>(n) * std::log(lambda * e) -
                            lambda * e -
                            std::lgamma(static_cast<double>(n) + 1.0);
    total += c.weight * std::exp(log_prior + log_pois);
  }
  return total;
}

struct PosteriorOracle {
  std::vector<GammaComp> prior;
  std::int64_t n;
  double e;
  double hi;  // integration upper bound
  double z;   // normalizer

  PosteriorOracle(std::vector<GammaComp> prior_, std::int64_t n_, double e_)
      : prior(std::move(prior_)), n(n_), e(e_) {
    hi = 1.0;
    for (const auto& c : prior) {
      const double post_shape = c.shape + static_cast<double>(n);
      const double post_rate = c.rate + e;
      hi = std::max(hi, post_shape / post_rate +
                            20.0 * std::sqrt(post_shape) / post_rate);
    }
    z = integrate([&](double l) { return posterior_density(prior, n, e, l); },
                  0.0, hi, 1e-14);
    if (!(z > 0.0)) throw std::runtime_error("oracle normalizer is zero");
  }

  double cdf(double x) const {
    if (x <= 0.0) return 0.0;
    const double v =
        integrate([&](double l) { return posterior_density(prior, n, e, l); },
                  0.0, std::min(x, hi), 1e-14) /
        z;
    return std::min(v, 1.0);
  }

  double quantile(double q) const {
    double lo = 0.0, up = hi;
    for (int it = 0; it < 200 && up - lo > 1e-11 * std::max(1.0, up); ++it) {
      const double mid = 0.5 * (lo + up);
      if (cdf(mid) < q)
        lo = mid;
      else
        up = mid;
    }
    return 0.5 * (lo + up);
  }

  double prob_above(double x) const { return 1.0 - cdf(x); }

  double mean() const {
    return integrate(
               [&](double l) {
                 return l * posterior_density(prior, n, e, l);
               },
               0.0, hi, 1e-14) /
           z;
  }
};

}  // namespace oracle
