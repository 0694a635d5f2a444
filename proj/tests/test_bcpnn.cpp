#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pvkit/bcpnn.hpp"
#include "pvkit/rng.hpp"

using namespace pvkit;

namespace {

ContingencyTable make_table(const Grid<std::int64_t>& counts) {
  std::vector<std::string> aes, drugs;
  for (std::size_t i = 0; i < counts.rows(); ++i)
    aes.push_back("AE" + std::to_string(i));
  for (std::size_t j = 0; j < counts.cols(); ++j)
    drugs.push_back("D" + std::to_string(j));
  return ContingencyTable(std::move(aes), std::move(drugs), counts);
}

// Independent recomputation of the plug-in formulas.
double ic_mean_oracle(double nij, double ni, double nj, double n) {
  const double beta = (n + 2.0) * (n + 2.0) / ((ni + 1.0) * (nj + 1.0)) - 1.0;
  return std::log2((nij + 1.0) * (n + 2.0) * (n + 2.0) /
                   ((n + beta) * (ni + 1.0) * (nj + 1.0)));
}

}  // namespace

TEST_CASE("estimate_beta smallest case") {
  Grid<std::int64_t> counts(2, 2, 0);
  counts(0, 0) = 1;
  counts(1, 1) = 1;
  const auto table = make_table(counts);
  // N = 2, Ni = Nj = 1: (2+2)^2 / (2*2) - 1 = 3.
  CHECK(estimate_beta(table, 0, 0) == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("estimate_beta on the all-ones table") {
  const auto table = make_table(Grid<std::int64_t>(2, 2, 1));
  // N = 4, Ni = Nj = 2: 36/9 - 1 = 3.
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      CHECK(estimate_beta(table, i, j) == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("ic mean matches the arithmetic oracle on the all-ones table") {
  const auto table = make_table(Grid<std::int64_t>(2, 2, 1));
  const auto res = ic(table);
  const double expected = ic_mean_oracle(1, 2, 2, 4);
  CHECK(res(0, 0).ic_mean == doctest::Approx(expected).epsilon(1e-12));
  CHECK(res(0, 0).beta_hat == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(res(0, 0).ic025 ==
        doctest::Approx(res(0, 0).ic_mean -
                        1.96 * std::sqrt(res(0, 0).ic_variance))
            .epsilon(1e-12));
}

TEST_CASE("ic mean reproduces the plug-in formula across a 10x5 fixture") {
  SplitRng rng(401);
  Grid<std::int64_t> counts(10, 5);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 5; ++j)
      counts(i, j) = static_cast<std::int64_t>(rng.next_u64() % 200);
  const auto table = make_table(counts);
  const auto res = ic(table);
  for (std::size_t i = 0; i < 10; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      const double expected = ic_mean_oracle(
          static_cast<double>(table.count(i, j)),
          static_cast<double>(table.row_total(i)),
          static_cast<double>(table.col_total(j)),
          static_cast<double>(table.grand_total()));
      CHECK(res(i, j).ic_mean == doctest::Approx(expected).epsilon(1e-12));
      CHECK(res(i, j).ic_variance > 0.0);
    }
  }
}

TEST_CASE("ic mean vanishes asymptotically on balanced independent tables") {
  Grid<std::int64_t> counts(2, 2, 1000);
  const auto res = ic(make_table(counts));
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      CHECK(std::fabs(res(i, j).ic_mean) < 0.02);
}

TEST_CASE("ic variance decreases as N_ij grows with marginals fixed") {
  // Fixed margins: row = (40, 60), col = (30, 70), N = 100; vary t = N_11.
  double prev = 1e300;
  for (const std::int64_t t : {5, 10, 15, 20, 25}) {
    Grid<std::int64_t> counts(2, 2);
    counts(0, 0) = t;
    counts(0, 1) = 40 - t;
    counts(1, 0) = 30 - t;
    counts(1, 1) = 30 + t;
    const auto res = ic(make_table(counts));
    CHECK(res(0, 0).ic_variance < prev);
    prev = res(0, 0).ic_variance;
  }
}

TEST_CASE("ic mean is invariant to transposition") {
  SplitRng rng(403);
  Grid<std::int64_t> counts(4, 3);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      counts(i, j) = static_cast<std::int64_t>(rng.next_u64() % 120);
  Grid<std::int64_t> tcounts(3, 4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 3; ++j) tcounts(j, i) = counts(i, j);

  const auto res = ic(make_table(counts));
  const auto tres = ic(make_table(tcounts));
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(res(i, j).ic_mean ==
            doctest::Approx(tres(j, i).ic_mean).epsilon(1e-13));
}

TEST_CASE("bcpnn decision rule") {
  Grid<IcResult> results(1, 3);
  results(0, 0) = {2.0, 0.01, 2.0 - 1.96 * 0.1, 1.0};  // ic025 ~ 1.804
  results(0, 1) = {0.0, 0.5, -1.386, 1.0};
  results(0, 2) = {0.5, 0.09, 0.5 - 1.96 * 0.3, 1.0};  // ic025 < 0
  const auto flags = bcpnn_signals(results, 0.0);
  CHECK(flags(0, 0) == 1);
  CHECK(flags(0, 1) == 0);
  CHECK(flags(0, 2) == 0);
}

TEST_CASE("bcpnn flags match a scan oracle on a fixture") {
  SplitRng rng(405);
  Grid<std::int64_t> counts(8, 4);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      counts(i, j) = static_cast<std::int64_t>(rng.next_u64() % 60);
  const auto table = make_table(counts);
  const auto res = ic(table);
  const auto flags = bcpnn_signals(res, 0.0);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      CHECK((flags(i, j) != 0) == (res(i, j).ic025 > 0.0));
}
