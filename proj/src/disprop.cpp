#include "pvkit/disprop.hpp"

#include <cmath>

namespace pvkit {

namespace {

constexpr double kZ95 = 1.96;

DisproportionalityResult interval_from(double log_est, double var) {
  DisproportionalityResult r;
  r.defined = true;
  r.estimate = std::exp(log_est);
  const double half = kZ95 * std::sqrt(var);
  r.ci_low = std::exp(log_est - half);
  r.ci_high = std::exp(log_est + half);
  return r;
}

}  // namespace

Grid<DisproportionalityResult> prr(const ContingencyTable& table) {
  Grid<DisproportionalityResult> out(table.n_aes(), table.n_drugs());
  const auto n = static_cast<double>(table.grand_total());
  for (std::size_t i = 0; i < table.n_aes(); ++i) {
    const auto ni = static_cast<double>(table.row_total(i));
    for (std::size_t j = 0; j < table.n_drugs(); ++j) {
      const auto nij = static_cast<double>(table.count(i, j));
      const auto nj = static_cast<double>(table.col_total(j));
      const double other = nj - nij;       // drug j among other AEs
      const double other_base = n - ni;    // reports on other AEs
      if (nij == 0.0 || other == 0.0 || ni == 0.0 || other_base == 0.0)
        continue;  // left undefined
      const double log_est =
          std::log(nij / ni) - std::log(other / other_base);
      const double var = 1.0 / nij - 1.0 / ni + 1.0 / other - 1.0 / other_base;
      out(i, j) = interval_from(log_est, var);
    }
  }
  return out;
}

Grid<DisproportionalityResult> ror(const ContingencyTable& table) {
  Grid<DisproportionalityResult> out(table.n_aes(), table.n_drugs());
  for (std::size_t i = 0; i < table.n_aes(); ++i) {
    for (std::size_t j = 0; j < table.n_drugs(); ++j) {
      const Collapsed2x2 c = collapse_2x2(table, i, j);
      if (c.n11 == 0 || c.n12 == 0 || c.n21 == 0 || c.n22 == 0)
        continue;  // left undefined
      const auto n11 = static_cast<double>(c.n11);
      const auto n12 = static_cast<double>(c.n12);
      const auto n21 = static_cast<double>(c.n21);
      const auto n22 = static_cast<double>(c.n22);
      const double log_est =
          std::log(n11 / n12) - std::log(n21 / n22);
      // Delta-method variance of the log odds ratio.
      const double var = 1.0 / n11 + 1.0 / n12 + 1.0 / n21 + 1.0 / n22;
      out(i, j) = interval_from(log_est, var);
    }
  }
  return out;
}

BoolGrid flag_signals(const Grid<DisproportionalityResult>& results,
                      const ThresholdRule& rule) {
  BoolGrid flags(results.rows(), results.cols(), 0);
  for (std::size_t i = 0; i < results.rows(); ++i) {
    for (std::size_t j = 0; j < results.cols(); ++j) {
      const auto& r = results(i, j);
      if (!r.defined) continue;
      const double v =
          rule.target == ThresholdRule::Target::Estimate ? r.estimate : r.ci_low;
      flags(i, j) = v > rule.threshold ? 1 : 0;
    }
  }
  return flags;
}

}  // namespace pvkit
