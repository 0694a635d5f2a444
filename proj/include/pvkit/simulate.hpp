#pragma once

#include <cstdint>
#include <vector>

#include "pvkit/grid.hpp"
#include "pvkit/table.hpp"

namespace pvkit {

// Synthetic table scenario. Row marginals set the null row profile; the
// signal map holds per-cell true signal strengths with lambda = 1 meaning
// null. Structural zeros are planted i.i.d. per cell with probability p0.
struct SimScenario {
  std::size_t n_aes = 0;
  std::size_t n_drugs = 0;
  std::vector<double> row_marginals;       // length I, nonnegative weights
  std::vector<std::int64_t> col_totals;    // length J
  Grid<double> signal_map;                 // I x J, default 1 everywhere
  double zero_inflation = 0.0;             // p0
  std::uint64_t seed = 0;

  static SimScenario null_scenario(std::size_t n_aes, std::size_t n_drugs,
                                   std::vector<double> row_marginals,
                                   std::vector<std::int64_t> col_totals,
                                   std::uint64_t seed);
  void validate() const;

  // True signal mask: lambda > 1.
  BoolGrid truth() const;
};

// Conditional null draw: each column j is Multinomial(col_total_j, row
// proportions). Deterministic given (scenario.seed, table_index).
ContingencyTable gen_null_conditional(const SimScenario& scenario,
                                      std::uint64_t table_index = 0);

// Unconditional draw: N_ij ~ ZIP(lambda_ij * E_ij, p0) with E_ij derived
// from the scenario marginals; p0 = 0 reduces to a pure Poisson table.
ContingencyTable gen_poisson_table(const SimScenario& scenario,
                                   std::uint64_t table_index = 0);

struct MetricReport {
  double fdr = 0.0;
  double sensitivity = 0.0;
  double type_i_error = 0.0;
  std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
};

// Confusion-matrix scoring with the conventions FDR = FP/max(TP+FP,1),
// sensitivity = TP/max(TP+FN,1), type-I = FP/max(FP+TN,1).
MetricReport score(const BoolGrid& decisions, const BoolGrid& truth);

}  // namespace pvkit
