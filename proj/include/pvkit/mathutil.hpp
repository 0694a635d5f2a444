#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace pvkit {

inline double log_sum_exp(std::span<const double> vals) {
  if (vals.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(vals.begin(), vals.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : vals) s += std::exp(v - m);
  return m + std::log(s);
}

inline double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::fabs(a - b)));
}

// log Poisson(k; mean) with the 0*log(0) := 0 convention at mean == 0.
inline double log_poisson_pmf(std::int64_t k, double mean) {
  if (mean == 0.0)
    return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  return static_cast<double>(k) * std::log(mean) - mean -
         std::lgamma(static_cast<double>(k) + 1.0);
}

// x*log(x) with 0*log(0) := 0.
inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

// x*log(y) with the convention that x == 0 silences y == 0.
inline double xlogy(double x, double y) {
  return x != 0.0 ? x * std::log(y) : 0.0;
}

}  // namespace pvkit
