#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "pvkit/errors.hpp"

namespace pvkit {

// Counter-based splittable generator. A stream is identified by
// (seed, id0, id1); draws walk a counter through the SplitMix64 output
// function, so any (seed, stream) pair yields the same sequence regardless
// of which thread consumes it and no global state is involved.
class SplitRng {
public:
  explicit SplitRng(std::uint64_t seed, std::uint64_t id0 = 0,
                    std::uint64_t id1 = 0) {
    key_ = mix(mix(mix(seed ^ 0x5bf0'3635'dde9'4ab5ULL) + id0) + id1);
  }

  std::uint64_t next_u64() { return mix(key_ + (++counter_) * kGolden); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1); safe to feed into log().
  double uniform_pos() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  double normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586476925286766559 * u2);
  }

private:
  static constexpr std::uint64_t kGolden = 0x9e37'79b9'7f4a'7c15ULL;

  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58'476d'1ce4'e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d0'49bb'1331'11ebULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

// Exact Poisson sampler: product-of-uniforms inversion for small means,
// Hormann's PTRS transformed rejection for large means.
std::int64_t sample_poisson(SplitRng& rng, double mean);

// Exact binomial sampler: CDF inversion for small n*p, Hormann's BTRS
// transformed rejection otherwise.
std::int64_t sample_binomial(SplitRng& rng, std::int64_t n, double p);

// Multinomial via sequential conditional binomials. `probs` need not be
// normalized. Returns one count per probability entry.
std::vector<std::int64_t> sample_multinomial(SplitRng& rng, std::int64_t n,
                                             std::span<const double> probs);

// Gamma(shape, rate) by Marsaglia-Tsang squeeze.
double sample_gamma(SplitRng& rng, double shape, double rate);

// Zero-inflated Poisson: a structural zero with probability p0, otherwise
// Poisson(mean).
std::int64_t sample_zip(SplitRng& rng, double mean, double p0);

}  // namespace pvkit
