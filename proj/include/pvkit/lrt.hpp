#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pvkit/table.hpp"

namespace pvkit {

// Outcome of one Monte Carlo calibrated test.
struct TestResult {
  double statistic = 0.0;   // log scale, >= 0
  double p_value = 1.0;
  bool decision = false;    // p_value < alpha
  std::size_t replications = 0;
  std::uint64_t seed = 0;
  std::optional<std::size_t> argmax_ae;
  std::optional<std::size_t> argmax_drug;  // extended test only
};

// Null fit of the zero-inflation proportion by profile likelihood.
struct ZipNullFit {
  double p0_hat = 0.0;
  double loglik = 0.0;
  bool degenerate = false;  // p0 pinned at the upper bound
  std::string note;
};

enum class CountModel { Poisson, Zip };

struct McOptions {
  double alpha = 0.05;
  unsigned threads = 1;
};

// Per-drug test with per-cell statistics and p-values calibrated against the
// null distribution of the column maximum.
struct ColumnTestResult {
  std::size_t drug_index = 0;
  TestResult drug;
  std::vector<double> cell_statistics;  // one per AE
  std::vector<double> cell_pvalues;     // one per AE, FWER-style vs max null
};

// log LR_ij under the reporting-rate parametrization, with MLEs
// p = N_ij/N_i., q = (N_.j-N_ij)/(N..-N_i.), p0 = N_.j/N.. and the
// 0*log(0) := 0 convention. One-sided zeroes the statistic when p <= q.
// Throws DegenerateMarginals when N_i. == 0.
double log_lr_cell(const ContingencyTable& table, std::size_t i, std::size_t j,
                   bool one_sided);

// max_i log LR_ij for drug j; ties break to the smallest AE index. Rows with
// zero marginals carry no information and contribute 0.
std::pair<double, std::size_t> mlr_drug(const ContingencyTable& table,
                                        std::size_t j, bool one_sided);

// Monte Carlo p-value for drug j: null columns are drawn from the
// conditional multinomial given the row marginals and the column total, and
// p = (1 + #{replicate >= observed}) / (reps + 1). Deterministic given
// (seed, reps) and invariant to the thread count.
TestResult mc_null_pvalue(const ContingencyTable& table, std::size_t j,
                          std::size_t reps, std::uint64_t seed, bool one_sided,
                          const McOptions& opts = {});

// Same engine, also reporting per-cell statistics and p-values.
ColumnTestResult lrt_column_test(const ContingencyTable& table, std::size_t j,
                                 std::size_t reps, std::uint64_t seed,
                                 bool one_sided, const McOptions& opts = {});

// Extended test over a drug set: statistic max_m max_i LR_im 1{p>q}, null
// columns sampled independently per drug given its own total.
TestResult ext_mlr(const ContingencyTable& table,
                   std::span<const std::size_t> drug_indices, std::size_t reps,
                   std::uint64_t seed, bool one_sided = true,
                   const McOptions& opts = {});

// Maximizes sum over the selected columns of log P_ZIP(N | theta=E, p0) over
// p0 in [0, 1-1e-6] by golden section. Cells with E == 0 are skipped.
ZipNullFit fit_zip_null(const ContingencyTable& table, const BaselineMatrix& E,
                        std::span<const std::size_t> columns);

struct PseudoLrtOutput {
  std::vector<ColumnTestResult> per_drug;
  std::optional<ZipNullFit> zip_null;  // present for CountModel::Zip
};

// Relative-reporting-rate test: per-cell one-sided statistic
// N log(N/E) - (N - E) for N > E else 0, per-drug statistic is the max over
// AEs, and the null is a parametric bootstrap from Poisson(E) or ZIP(E, p0)
// with E held fixed. Under the shared-p0 profile the ZIP statistic coincides
// with the Poisson one; the models differ in the bootstrap null.
PseudoLrtOutput pseudo_lrt(const ContingencyTable& table,
                           const BaselineMatrix& E,
                           std::span<const std::size_t> drug_indices,
                           CountModel model, std::size_t reps,
                           std::uint64_t seed, const McOptions& opts = {});

}  // namespace pvkit
