#include "pvkit/rng.hpp"

#include <algorithm>
#include <cmath>

namespace pvkit {

namespace {

double log_binomial_pmf(std::int64_t k, std::int64_t n, double p) {
  const double kk = static_cast<double>(k);
  const double nn = static_cast<double>(n);
  return std::lgamma(nn + 1.0) - std::lgamma(kk + 1.0) -
         std::lgamma(nn - kk + 1.0) + kk * std::log(p) +
         (nn - kk) * std::log1p(-p);
}

// Hormann (1993) transformed rejection with squeeze, for mean >= 10.
std::int64_t poisson_ptrs(SplitRng& rng, double mean) {
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);

  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform_pos();
    const double us = 0.5 - std::fabs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::int64_t>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    const auto k = static_cast<std::int64_t>(kf);
    const double lhs =
        std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b);
    const double rhs = kf * loglam - mean - std::lgamma(kf + 1.0);
    if (lhs <= rhs) return k;
  }
}

// Hormann-style transformed rejection for binomials with n*p >= 10 and
// p <= 0.5. Acceptance uses the exact pmf ratio against the mode.
std::int64_t binomial_btrs(SplitRng& rng, std::int64_t n, double p) {
  const double nn = static_cast<double>(n);
  const double spq = std::sqrt(nn * p * (1.0 - p));
  const double b = 1.15 + 2.53 * spq;
  const double a = -0.0873 + 0.0248 * b + 0.01 * p;
  const double c = nn * p + 0.5;
  const double vr = 0.92 - 4.2 / b;
  const double alpha = (2.83 + 5.1 / b) * spq;
  const auto m = static_cast<std::int64_t>(std::floor((nn + 1.0) * p));
  const double log_pmf_mode = log_binomial_pmf(m, n, p);

  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform_pos();
    const double us = 0.5 - std::fabs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + c);
    if (kf < 0.0 || kf > nn) continue;
    const auto k = static_cast<std::int64_t>(kf);
    if (us >= 0.07 && v <= vr) return k;
    const double lhs =
        std::log(v * alpha / (a / (us * us) + b));
    if (lhs <= log_binomial_pmf(k, n, p) - log_pmf_mode) return k;
  }
}

std::int64_t binomial_inversion(SplitRng& rng, std::int64_t n, double p) {
  const double q = 1.0 - p;
  const double r = p / q;
  double pmf = std::exp(static_cast<double>(n) * std::log(q));
  if (pmf <= 0.0) {
    // n*log(q) underflowed; fall back to the exact log-space walk.
    double u = std::log(rng.uniform_pos());
    double log_cdf = log_binomial_pmf(0, n, p);
    std::int64_t k = 0;
    while (u > log_cdf && k < n) {
      ++k;
      const double log_pmf = log_binomial_pmf(k, n, p);
      log_cdf = std::max(log_cdf, log_pmf) +
                std::log1p(std::exp(-std::fabs(log_cdf - log_pmf)));
    }
    return k;
  }
  double u = rng.uniform();
  std::int64_t k = 0;
  while (u > pmf && k < n) {
    u -= pmf;
    pmf *= r * static_cast<double>(n - k) / static_cast<double>(k + 1);
    ++k;
  }
  return k;
}

}  // namespace

std::int64_t sample_poisson(SplitRng& rng, double mean) {
  if (!(mean >= 0.0)) throw InvalidArgument("poisson mean must be >= 0");
  if (mean == 0.0) return 0;
  if (mean < 10.0) {
    const double limit = std::exp(-mean);
    std::int64_t k = 0;
    double prod = rng.uniform_pos();
    while (prod > limit) {
      ++k;
      prod *= rng.uniform_pos();
    }
    return k;
  }
  return poisson_ptrs(rng, mean);
}

std::int64_t sample_binomial(SplitRng& rng, std::int64_t n, double p) {
  if (n < 0 || p < 0.0 || p > 1.0)
    throw InvalidArgument("binomial requires n >= 0 and p in [0,1]");
  if (n == 0 || p == 0.0) return 0;
  if (p == 1.0) return n;
  if (p > 0.5) return n - sample_binomial(rng, n, 1.0 - p);
  if (static_cast<double>(n) * p < 10.0) return binomial_inversion(rng, n, p);
  return binomial_btrs(rng, n, p);
}

std::vector<std::int64_t> sample_multinomial(SplitRng& rng, std::int64_t n,
                                             std::span<const double> probs) {
  double total = 0.0;
  for (double p : probs) {
    if (p < 0.0) throw InvalidArgument("multinomial probabilities must be >= 0");
    total += p;
  }
  if (total <= 0.0) throw InvalidArgument("multinomial needs positive mass");

  std::vector<std::int64_t> counts(probs.size(), 0);
  std::int64_t remaining = n;
  double mass_left = total;
  for (std::size_t i = 0; i + 1 < probs.size() && remaining > 0; ++i) {
    const double cond = std::clamp(probs[i] / mass_left, 0.0, 1.0);
    counts[i] = sample_binomial(rng, remaining, cond);
    remaining -= counts[i];
    mass_left -= probs[i];
    if (mass_left <= 0.0) break;
  }
  if (!probs.empty()) counts.back() += remaining;
  return counts;
}

double sample_gamma(SplitRng& rng, double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0))
    throw InvalidArgument("gamma requires positive shape and rate");
  if (shape < 1.0) {
    const double boost = std::pow(rng.uniform_pos(), 1.0 / shape);
    return sample_gamma(rng, shape + 1.0, rate) * boost;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    const double x = rng.normal();
    const double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    const double v = t * t * t;
    const double u = rng.uniform_pos();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v / rate;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

std::int64_t sample_zip(SplitRng& rng, double mean, double p0) {
  if (p0 < 0.0 || p0 > 1.0) throw InvalidArgument("p0 must be in [0,1]");
  if (rng.bernoulli(p0)) return 0;
  return sample_poisson(rng, mean);
}

}  // namespace pvkit
