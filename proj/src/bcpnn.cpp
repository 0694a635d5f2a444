#include "pvkit/bcpnn.hpp"

#include <algorithm>
#include <cmath>

#include "pvkit/errors.hpp"

namespace pvkit {

double estimate_beta(const ContingencyTable& table, std::size_t i,
                     std::size_t j) {
  if (i >= table.n_aes() || j >= table.n_drugs())
    throw InvalidArgument("cell index out of range");
  const auto n = static_cast<double>(table.grand_total());
  const auto ni = static_cast<double>(table.row_total(i));
  const auto nj = static_cast<double>(table.col_total(j));
  return (n + 2.0) * (n + 2.0) / ((ni + 1.0) * (nj + 1.0)) - 1.0;
}

Grid<IcResult> ic(const ContingencyTable& table) {
  if (table.grand_total() == 0) throw DegenerateTable("grand total is zero");
  const double log2sq = std::log(2.0) * std::log(2.0);
  const auto n = static_cast<double>(table.grand_total());

  Grid<IcResult> out(table.n_aes(), table.n_drugs());
  for (std::size_t i = 0; i < table.n_aes(); ++i) {
    const auto ni = static_cast<double>(table.row_total(i));
    for (std::size_t j = 0; j < table.n_drugs(); ++j) {
      const auto nj = static_cast<double>(table.col_total(j));
      const auto nij = static_cast<double>(table.count(i, j));
      const double beta = estimate_beta(table, i, j);

      IcResult r;
      r.beta_hat = beta;
      r.ic_mean = std::log2((nij + 1.0) * (n + 2.0) * (n + 2.0) /
                            ((n + beta) * (ni + 1.0) * (nj + 1.0)));
      const double t1 =
          (n - nij + beta - 1.0) / ((nij + 1.0) * (1.0 + n + beta));
      const double t2 = (n - ni + 1.0) / ((ni + 1.0) * (n + 3.0));
      const double t3 = (n - nj + 1.0) / ((nj + 1.0) * (n + 3.0));
      r.ic_variance = std::max(0.0, (t1 + t2 + t3) / log2sq);
      r.ic025 = r.ic_mean - 1.96 * std::sqrt(r.ic_variance);
      out(i, j) = r;
    }
  }
  return out;
}

BoolGrid bcpnn_signals(const Grid<IcResult>& results, double threshold) {
  BoolGrid flags(results.rows(), results.cols(), 0);
  for (std::size_t i = 0; i < results.rows(); ++i)
    for (std::size_t j = 0; j < results.cols(); ++j)
      flags(i, j) = results(i, j).ic025 > threshold ? 1 : 0;
  return flags;
}

}  // namespace pvkit
