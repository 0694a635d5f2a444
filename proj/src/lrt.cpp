#include "pvkit/lrt.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include "pvkit/errors.hpp"
#include "pvkit/mathutil.hpp"
#include "pvkit/optim.hpp"
#include "pvkit/parallel.hpp"
#include "pvkit/rng.hpp"

namespace pvkit {

namespace {

// Cell statistic for the conditional parametrization, written so the
// 0*log(0) conventions cover empty rows and saturated columns.
double lr_stat(std::int64_t nij, std::int64_t ni, std::int64_t nj,
               std::int64_t n, bool one_sided) {
  if (ni == 0 || nj == 0) return 0.0;
  const double dnij = static_cast<double>(nij);
  const double dni = static_cast<double>(ni);
  const double dnj = static_cast<double>(nj);
  const double dn = static_cast<double>(n);
  const double p_hat = dnij / dni;
  const double other = dn - dni;
  const double q_hat = other > 0.0 ? (dnj - dnij) / other : 0.0;
  if (one_sided && !(p_hat > q_hat)) return 0.0;
  const double stat = xlogy(dnij, p_hat) + xlogy(dnj - dnij, q_hat) -
                      dnj * std::log(dnj / dn);
  return std::max(0.0, stat);
}

// Max over AEs given one simulated (or observed) column.
std::pair<double, std::size_t> column_max(std::span<const std::int64_t> col,
                                          std::span<const std::int64_t> row_totals,
                                          std::int64_t nj, std::int64_t n,
                                          bool one_sided) {
  double best = 0.0;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < col.size(); ++i) {
    if (row_totals[i] == 0) continue;
    const double s = lr_stat(col[i], row_totals[i], nj, n, one_sided);
    if (s > best) {
      best = s;
      arg = i;
    }
  }
  return {best, arg};
}

std::vector<double> cell_pvalues_from_null(std::span<const double> cell_stats,
                                           std::vector<double> null_max,
                                           std::size_t reps) {
  std::sort(null_max.begin(), null_max.end());
  std::vector<double> out(cell_stats.size());
  for (std::size_t i = 0; i < cell_stats.size(); ++i) {
    const auto it = std::lower_bound(null_max.begin(), null_max.end(),
                                     cell_stats[i]);
    const auto ge = static_cast<std::size_t>(null_max.end() - it);
    out[i] = static_cast<double>(1 + ge) / static_cast<double>(reps + 1);
  }
  return out;
}

double zip_log_pmf(std::int64_t n, double theta, double p0) {
  if (n == 0) {
    // log(p0 + (1-p0) exp(-theta))
    if (p0 >= 1.0) return 0.0;
    return log_add(std::log(p0), std::log1p(-p0) - theta);
  }
  return std::log1p(-p0) + log_poisson_pmf(n, theta);
}

double pseudo_cell_stat(std::int64_t n, double e) {
  if (e == 0.0) {
    if (n > 0)
      throw ImpossibleBaseline("N > 0 in a cell with zero expected baseline");
    return 0.0;
  }
  const double dn = static_cast<double>(n);
  if (dn <= e) return 0.0;
  return dn * std::log(dn / e) - (dn - e);
}

}  // namespace

double log_lr_cell(const ContingencyTable& table, std::size_t i, std::size_t j,
                   bool one_sided) {
  if (i >= table.n_aes() || j >= table.n_drugs())
    throw InvalidArgument("cell index out of range");
  if (table.row_total(i) == 0)
    throw DegenerateMarginals("row marginal is zero for AE " +
                              table.ae_label(i));
  return lr_stat(table.count(i, j), table.row_total(i), table.col_total(j),
                 table.grand_total(), one_sided);
}

std::pair<double, std::size_t> mlr_drug(const ContingencyTable& table,
                                        std::size_t j, bool one_sided) {
  if (j >= table.n_drugs()) throw InvalidArgument("drug index out of range");
  std::vector<std::int64_t> col(table.n_aes());
  for (std::size_t i = 0; i < table.n_aes(); ++i) col[i] = table.count(i, j);
  return column_max(col, table.row_totals(), table.col_total(j),
                    table.grand_total(), one_sided);
}

ColumnTestResult lrt_column_test(const ContingencyTable& table, std::size_t j,
                                 std::size_t reps, std::uint64_t seed,
                                 bool one_sided, const McOptions& opts) {
  if (reps < 1) throw InvalidArgument("reps must be >= 1");
  if (j >= table.n_drugs()) throw InvalidArgument("drug index out of range");

  ColumnTestResult res;
  res.drug_index = j;
  res.drug.seed = seed;
  res.drug.replications = reps;

  const std::size_t rows = table.n_aes();
  res.cell_statistics.resize(rows, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    if (table.row_total(i) == 0) continue;
    res.cell_statistics[i] = lr_stat(table.count(i, j), table.row_total(i),
                                     table.col_total(j), table.grand_total(),
                                     one_sided);
  }
  const auto [obs, argmax] = mlr_drug(table, j, one_sided);
  res.drug.statistic = obs;
  res.drug.argmax_ae = argmax;

  if (table.col_total(j) == 0) {
    res.drug.p_value = 1.0;
    res.drug.decision = false;
    res.cell_pvalues.assign(rows, 1.0);
    return res;
  }

  std::vector<double> probs(rows);
  for (std::size_t i = 0; i < rows; ++i)
    probs[i] = static_cast<double>(table.row_total(i));

  std::vector<double> null_max(reps, 0.0);
  const std::int64_t nj = table.col_total(j);
  const std::int64_t n = table.grand_total();
  parallel_for(reps, opts.threads, [&](std::size_t r) {
    SplitRng rng(seed, r + 1, j + 1);
    const auto col = sample_multinomial(rng, nj, probs);
    null_max[r] =
        column_max(col, table.row_totals(), nj, n, one_sided).first;
  });

  std::size_t ge = 0;
  for (double s : null_max)
    if (s >= obs) ++ge;
  res.drug.p_value =
      static_cast<double>(1 + ge) / static_cast<double>(reps + 1);
  res.drug.decision = res.drug.p_value < opts.alpha;
  res.cell_pvalues =
      cell_pvalues_from_null(res.cell_statistics, std::move(null_max), reps);
  return res;
}

TestResult mc_null_pvalue(const ContingencyTable& table, std::size_t j,
                          std::size_t reps, std::uint64_t seed, bool one_sided,
                          const McOptions& opts) {
  return lrt_column_test(table, j, reps, seed, one_sided, opts).drug;
}

TestResult ext_mlr(const ContingencyTable& table,
                   std::span<const std::size_t> drug_indices, std::size_t reps,
                   std::uint64_t seed, bool one_sided, const McOptions& opts) {
  if (drug_indices.empty()) throw EmptyInput("no drug indices");
  if (reps < 1) throw InvalidArgument("reps must be >= 1");
  for (std::size_t j : drug_indices)
    if (j >= table.n_drugs()) throw InvalidArgument("drug index out of range");

  TestResult res;
  res.seed = seed;
  res.replications = reps;
  for (std::size_t j : drug_indices) {
    const auto [s, arg] = mlr_drug(table, j, one_sided);
    if (!res.argmax_ae || s > res.statistic) {
      res.statistic = s;
      res.argmax_ae = arg;
      res.argmax_drug = j;
    }
  }

  const std::size_t rows = table.n_aes();
  std::vector<double> probs(rows);
  for (std::size_t i = 0; i < rows; ++i)
    probs[i] = static_cast<double>(table.row_total(i));
  const std::int64_t n = table.grand_total();

  std::vector<double> null_max(reps, 0.0);
  parallel_for(reps, opts.threads, [&](std::size_t r) {
    double best = 0.0;
    for (std::size_t j : drug_indices) {
      const std::int64_t nj = table.col_total(j);
      if (nj == 0) continue;
      SplitRng rng(seed, r + 1, j + 1);
      const auto col = sample_multinomial(rng, nj, probs);
      best = std::max(
          best, column_max(col, table.row_totals(), nj, n, one_sided).first);
    }
    null_max[r] = best;
  });

  std::size_t ge = 0;
  for (double s : null_max)
    if (s >= res.statistic) ++ge;
  res.p_value = static_cast<double>(1 + ge) / static_cast<double>(reps + 1);
  res.decision = res.p_value < opts.alpha;
  return res;
}

ZipNullFit fit_zip_null(const ContingencyTable& table, const BaselineMatrix& E,
                        std::span<const std::size_t> columns) {
  if (columns.empty()) throw EmptyInput("no columns selected");
  if (E.expected.rows() != table.n_aes() ||
      E.expected.cols() != table.n_drugs())
    throw InvalidArgument("baseline matrix does not match table shape");

  struct Cell {
    std::int64_t n;
    double e;
  };
  std::vector<Cell> cells;
  bool any_zero = false;
  for (std::size_t j : columns) {
    if (j >= table.n_drugs()) throw InvalidArgument("column index out of range");
    for (std::size_t i = 0; i < table.n_aes(); ++i) {
      const double e = E.expected(i, j);
      if (e == 0.0) continue;  // non-informative for p0
      cells.push_back({table.count(i, j), e});
      if (table.count(i, j) == 0) any_zero = true;
    }
  }

  const auto loglik = [&](double p0) {
    double ll = 0.0;
    for (const auto& c : cells) ll += zip_log_pmf(c.n, c.e, p0);
    return ll;
  };

  ZipNullFit fit;
  if (!any_zero) {
    fit.p0_hat = 0.0;
    fit.loglik = loglik(0.0);
    fit.note = "no zero cells; p0 fixed at 0";
    return fit;
  }

  constexpr double kUpper = 1.0 - 1e-6;
  fit.p0_hat = golden_section_max(loglik, 0.0, kUpper, 1e-6);
  fit.loglik = loglik(fit.p0_hat);
  if (fit.p0_hat >= kUpper - 1e-5) {
    fit.degenerate = true;
    fit.note = "p0 at upper bound; all informative cells are zero";
  }
  return fit;
}

PseudoLrtOutput pseudo_lrt(const ContingencyTable& table,
                           const BaselineMatrix& E,
                           std::span<const std::size_t> drug_indices,
                           CountModel model, std::size_t reps,
                           std::uint64_t seed, const McOptions& opts) {
  if (drug_indices.empty()) throw EmptyInput("no drug indices");
  if (reps < 1) throw InvalidArgument("reps must be >= 1");
  if (E.expected.rows() != table.n_aes() ||
      E.expected.cols() != table.n_drugs())
    throw InvalidArgument("baseline matrix does not match table shape");

  PseudoLrtOutput out;
  double p0 = 0.0;
  if (model == CountModel::Zip) {
    out.zip_null = fit_zip_null(table, E, drug_indices);
    p0 = out.zip_null->p0_hat;
  }

  const std::size_t rows = table.n_aes();
  out.per_drug.reserve(drug_indices.size());
  for (std::size_t j : drug_indices) {
    if (j >= table.n_drugs()) throw InvalidArgument("drug index out of range");
    ColumnTestResult res;
    res.drug_index = j;
    res.drug.seed = seed;
    res.drug.replications = reps;

    res.cell_statistics.resize(rows, 0.0);
    double obs = 0.0;
    std::size_t argmax = 0;
    for (std::size_t i = 0; i < rows; ++i) {
      res.cell_statistics[i] = pseudo_cell_stat(table.count(i, j),
                                                E.expected(i, j));
      if (res.cell_statistics[i] > obs) {
        obs = res.cell_statistics[i];
        argmax = i;
      }
    }
    res.drug.statistic = obs;
    res.drug.argmax_ae = argmax;

    std::vector<double> null_max(reps, 0.0);
    parallel_for(reps, opts.threads, [&](std::size_t r) {
      SplitRng rng(seed, r + 1, j + 1);
      double best = 0.0;
      for (std::size_t i = 0; i < rows; ++i) {
        const double e = E.expected(i, j);
        if (e == 0.0) continue;
        const std::int64_t nstar = model == CountModel::Zip
                                       ? sample_zip(rng, e, p0)
                                       : sample_poisson(rng, e);
        best = std::max(best, pseudo_cell_stat(nstar, e));
      }
      null_max[r] = best;
    });

    std::size_t ge = 0;
    for (double s : null_max)
      if (s >= obs) ++ge;
    res.drug.p_value =
        static_cast<double>(1 + ge) / static_cast<double>(reps + 1);
    res.drug.decision = res.drug.p_value < opts.alpha;
    res.cell_pvalues = cell_pvalues_from_null(res.cell_statistics,
                                              std::move(null_max), reps);
    out.per_drug.push_back(std::move(res));
  }
  return out;
}

}  // namespace pvkit
