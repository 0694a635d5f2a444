#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pvkit/disprop.hpp"
#include "pvkit/rng.hpp"

using namespace pvkit;

namespace {

ContingencyTable make_table(std::vector<std::vector<std::int64_t>> rows) {
  const std::size_t nr = rows.size();
  const std::size_t nc = rows[0].size();
  Grid<std::int64_t> counts(nr, nc);
  std::vector<std::string> aes, drugs;
  for (std::size_t i = 0; i < nr; ++i) {
    aes.push_back("AE" + std::to_string(i));
    for (std::size_t j = 0; j < nc; ++j) counts(i, j) = rows[i][j];
  }
  for (std::size_t j = 0; j < nc; ++j) drugs.push_back("D" + std::to_string(j));
  return ContingencyTable(std::move(aes), std::move(drugs), std::move(counts));
}

}  // namespace

TEST_CASE("PRR on exact independence equals 1") {
  const auto table = make_table({{10, 20}, {90, 180}});
  const auto res = prr(table);
  REQUIRE(res(0, 0).defined);
  CHECK(res(0, 0).estimate == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("PRR arithmetic example") {
  const auto table = make_table({{20, 20}, {90, 180}});
  const auto res = prr(table);
  // (20/40) / (90/270)
  CHECK(res(0, 0).estimate == doctest::Approx(1.5).epsilon(1e-14));
  // Delta-method CI recomputation.
  const double var = 1.0 / 20 - 1.0 / 40 + 1.0 / 90 - 1.0 / 270;
  const double lo = std::exp(std::log(1.5) - 1.96 * std::sqrt(var));
  const double hi = std::exp(std::log(1.5) + 1.96 * std::sqrt(var));
  CHECK(res(0, 0).ci_low == doctest::Approx(lo).epsilon(1e-12));
  CHECK(res(0, 0).ci_high == doctest::Approx(hi).epsilon(1e-12));
  CHECK(res(0, 0).ci_low <= res(0, 0).estimate);
  CHECK(res(0, 0).estimate <= res(0, 0).ci_high);
}

TEST_CASE("zero counts leave cells undefined") {
  const auto table = make_table({{0, 20}, {90, 180}});
  CHECK_FALSE(prr(table)(0, 0).defined);
  CHECK_FALSE(ror(table)(0, 0).defined);
  // A column fully concentrated in one AE: N_.j - N_ij = 0.
  const auto table2 = make_table({{5, 20}, {0, 180}});
  CHECK_FALSE(prr(table2)(0, 0).defined);
  CHECK_FALSE(ror(table2)(0, 0).defined);
}

TEST_CASE("ROR on exact independence equals 1") {
  const auto table = make_table({{10, 20}, {90, 180}});
  const auto res = ror(table);
  REQUIRE(res(0, 0).defined);
  CHECK(res(0, 0).estimate == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("ROR arithmetic example with CI") {
  const auto table = make_table({{20, 20}, {90, 180}});
  const auto res = ror(table);
  // (20/20) / (90/180)
  CHECK(res(0, 0).estimate == doctest::Approx(2.0).epsilon(1e-14));
  const double var = 1.0 / 20 + 1.0 / 20 + 1.0 / 90 + 1.0 / 180;
  const double lo = std::exp(std::log(2.0) - 1.96 * std::sqrt(var));
  CHECK(res(0, 0).ci_low == doctest::Approx(lo).epsilon(1e-12));
  CHECK(res(0, 0).ci_low > 0.0);
  CHECK(res(0, 0).ci_low <= res(0, 0).estimate);
  CHECK(res(0, 0).estimate <= res(0, 0).ci_high);
}

TEST_CASE("independence identity holds across a larger rank-1 table") {
  // N_ij = r_i * c_j gives exact independence with integer cells.
  const std::vector<std::int64_t> r = {2, 3, 5};
  const std::vector<std::int64_t> c = {4, 6, 10, 20};
  Grid<std::int64_t> counts(3, 4);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 4; ++j) counts(i, j) = r[i] * c[j];
  const ContingencyTable table({"a", "b", "c"}, {"w", "x", "y", "z"}, counts);
  const auto p = prr(table);
  const auto o = ror(table);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      REQUIRE(p(i, j).defined);
      REQUIRE(o(i, j).defined);
      CHECK(std::fabs(p(i, j).estimate - 1.0) < 1e-12);
      CHECK(std::fabs(o(i, j).estimate - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("PRR and ROR agree to first order for rare cells") {
  // Cells with N_ij / N_i. < 0.01.
  const auto table = make_table({{5, 995}, {60, 11940}});
  const auto p = prr(table)(0, 0);
  const auto o = ror(table)(0, 0);
  REQUIRE(p.defined);
  REQUIRE(o.defined);
  CHECK(std::fabs(p.estimate - o.estimate) / p.estimate < 0.05);
}

TEST_CASE("CI width shrinks as all four cells scale up") {
  double prev_width_prr = 1e300;
  double prev_width_ror = 1e300;
  for (const int k : {1, 4, 16}) {
    const auto table = make_table({{20 * k, 20 * k}, {90 * k, 180 * k}});
    const auto p = prr(table)(0, 0);
    const auto o = ror(table)(0, 0);
    const double wp = std::log(p.ci_high) - std::log(p.ci_low);
    const double wo = std::log(o.ci_high) - std::log(o.ci_low);
    CHECK(wp < prev_width_prr);
    CHECK(wo < prev_width_ror);
    prev_width_prr = wp;
    prev_width_ror = wo;
  }
}

TEST_CASE("flag_signals matches a scan oracle and skips undefined cells") {
  SplitRng rng(301);
  Grid<DisproportionalityResult> results(6, 5);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      auto& r = results(i, j);
      r.defined = rng.uniform() < 0.8;
      r.estimate = rng.uniform(0.1, 5.0);
      r.ci_low = r.estimate * 0.7;
      r.ci_high = r.estimate * 1.4;
    }
  }
  const ThresholdRule est_rule{ThresholdRule::Target::Estimate, 2.0};
  const auto flags = flag_signals(results, est_rule);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 5; ++j)
      CHECK((flags(i, j) != 0) ==
            (results(i, j).defined && results(i, j).estimate > 2.0));

  const ThresholdRule ci_rule{ThresholdRule::Target::CiLow, 1.0};
  const auto ci_flags = flag_signals(results, ci_rule);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 5; ++j)
      CHECK((ci_flags(i, j) != 0) ==
            (results(i, j).defined && results(i, j).ci_low > 1.0));
}

TEST_CASE("rule examples") {
  Grid<DisproportionalityResult> results(1, 2);
  results(0, 0) = {1.5, 1.2, 1.9, true};
  results(0, 1) = {9.0, 5.0, 12.0, false};  // undefined
  const auto flags =
      flag_signals(results, {ThresholdRule::Target::CiLow, 1.0});
  CHECK(flags(0, 0) == 1);
  CHECK(flags(0, 1) == 0);
}
