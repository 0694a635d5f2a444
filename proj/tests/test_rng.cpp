#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "pvkit/rng.hpp"

using namespace pvkit;

namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

template <typename F>
Moments sample_moments(std::size_t n, F&& draw) {
  double s = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(draw(i));
    s += x;
    s2 += x * x;
  }
  Moments m;
  m.mean = s / static_cast<double>(n);
  m.var = s2 / static_cast<double>(n) - m.mean * m.mean;
  return m;
}

}  // namespace

TEST_CASE("streams are deterministic and distinct") {
  SplitRng a(42, 1, 2);
  SplitRng b(42, 1, 2);
  SplitRng c(42, 1, 3);
  bool any_diff = false;
  for (int i = 0; i < 100; ++i) {
    const auto va = a.next_u64();
    CHECK(va == b.next_u64());
    if (va != c.next_u64()) any_diff = true;
  }
  CHECK(any_diff);
}

TEST_CASE("uniform covers [0,1)") {
  SplitRng rng(7);
  const auto m = sample_moments(200000, [&](std::size_t) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    return u;
  });
  CHECK(m.mean == doctest::Approx(0.5).epsilon(0.01));
  CHECK(m.var == doctest::Approx(1.0 / 12.0).epsilon(0.02));
}

TEST_CASE("poisson moments, both branches") {
  for (const double mean : {0.3, 3.7, 48.3, 640.0}) {
    SplitRng rng(11, static_cast<std::uint64_t>(mean * 10));
    const std::size_t n = 200000;
    const auto m =
        sample_moments(n, [&](std::size_t) { return sample_poisson(rng, mean); });
    const double se = std::sqrt(mean / static_cast<double>(n));
    CHECK(std::fabs(m.mean - mean) < 4.0 * se);
    CHECK(m.var == doctest::Approx(mean).epsilon(0.05));
  }
}

TEST_CASE("binomial moments, both branches") {
  struct Case {
    std::int64_t n;
    double p;
  };
  for (const Case c : {Case{40, 0.1}, Case{5000, 0.3}, Case{200, 0.9},
                       Case{100000, 0.47}}) {
    SplitRng rng(13, static_cast<std::uint64_t>(c.n));
    const std::size_t reps = 100000;
    const auto m = sample_moments(
        reps, [&](std::size_t) { return sample_binomial(rng, c.n, c.p); });
    const double mean = static_cast<double>(c.n) * c.p;
    const double var = mean * (1.0 - c.p);
    const double se = std::sqrt(var / static_cast<double>(reps));
    CHECK(std::fabs(m.mean - mean) < 4.0 * se);
    CHECK(m.var == doctest::Approx(var).epsilon(0.05));
  }
}

TEST_CASE("binomial edge cases") {
  SplitRng rng(1);
  CHECK(sample_binomial(rng, 0, 0.5) == 0);
  CHECK(sample_binomial(rng, 10, 0.0) == 0);
  CHECK(sample_binomial(rng, 10, 1.0) == 10);
  for (int i = 0; i < 1000; ++i) {
    const auto x = sample_binomial(rng, 5, 0.4);
    CHECK(x >= 0);
    CHECK(x <= 5);
  }
}

TEST_CASE("multinomial conserves the total and matches cell means") {
  const std::vector<double> w = {5.0, 1.0, 3.0, 0.0, 1.0};
  const std::int64_t n = 1000;
  std::vector<double> sums(w.size(), 0.0);
  const std::size_t reps = 20000;
  for (std::size_t r = 0; r < reps; ++r) {
    SplitRng rng(17, r);
    const auto counts = sample_multinomial(rng, n, w);
    std::int64_t total = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      total += counts[i];
      sums[i] += static_cast<double>(counts[i]);
    }
    REQUIRE(total == n);
    REQUIRE(counts[3] == 0);
  }
  const double wsum = 10.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double p = w[i] / wsum;
    const double mean = static_cast<double>(n) * p;
    const double se =
        std::sqrt(mean * (1.0 - p) / static_cast<double>(reps));
    CHECK(std::fabs(sums[i] / static_cast<double>(reps) - mean) <=
          4.0 * se + 1e-9);
  }
}

TEST_CASE("gamma moments, including shape < 1") {
  struct Case {
    double shape, rate;
  };
  for (const Case c : {Case{0.6, 2.0}, Case{4.0, 1.0}, Case{25.0, 0.5}}) {
    SplitRng rng(19, static_cast<std::uint64_t>(c.shape * 10));
    const std::size_t n = 200000;
    const auto m = sample_moments(
        n, [&](std::size_t) { return sample_gamma(rng, c.shape, c.rate); });
    CHECK(m.mean == doctest::Approx(c.shape / c.rate).epsilon(0.02));
    CHECK(m.var ==
          doctest::Approx(c.shape / (c.rate * c.rate)).epsilon(0.05));
  }
}

TEST_CASE("zip adds structural zeros") {
  SplitRng rng(23);
  const double mean = 5.0, p0 = 0.4;
  const std::size_t n = 100000;
  std::size_t zeros = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = sample_zip(rng, mean, p0);
    if (x == 0) ++zeros;
    sum += static_cast<double>(x);
  }
  const double p_zero = p0 + (1.0 - p0) * std::exp(-mean);
  CHECK(static_cast<double>(zeros) / static_cast<double>(n) ==
        doctest::Approx(p_zero).epsilon(0.03));
  CHECK(sum / static_cast<double>(n) ==
        doctest::Approx((1.0 - p0) * mean).epsilon(0.02));
}
