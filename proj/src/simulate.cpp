#include "pvkit/simulate.hpp"

#include <numeric>
#include <string>

#include "pvkit/errors.hpp"
#include "pvkit/rng.hpp"

namespace pvkit {

namespace {

std::vector<std::string> index_labels(const char* prefix, std::size_t count) {
  std::vector<std::string> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(std::string(prefix) + std::to_string(i + 1));
  return out;
}

}  // namespace

SimScenario SimScenario::null_scenario(std::size_t n_aes, std::size_t n_drugs,
                                       std::vector<double> row_marginals,
                                       std::vector<std::int64_t> col_totals,
                                       std::uint64_t seed) {
  SimScenario s;
  s.n_aes = n_aes;
  s.n_drugs = n_drugs;
  s.row_marginals = std::move(row_marginals);
  s.col_totals = std::move(col_totals);
  s.signal_map = Grid<double>(n_aes, n_drugs, 1.0);
  s.seed = seed;
  s.validate();
  return s;
}

void SimScenario::validate() const {
  if (n_aes == 0 || n_drugs == 0)
    throw InvalidArgument("scenario dimensions must be positive");
  if (row_marginals.size() != n_aes)
    throw InvalidArgument("row_marginals length must equal I");
  if (col_totals.size() != n_drugs)
    throw InvalidArgument("col_totals length must equal J");
  for (double r : row_marginals)
    if (r < 0.0) throw InvalidArgument("row marginals must be >= 0");
  for (std::int64_t c : col_totals)
    if (c < 0) throw InvalidArgument("column totals must be >= 0");
  if (signal_map.rows() != n_aes || signal_map.cols() != n_drugs)
    throw InvalidArgument("signal_map shape must be I x J");
  for (double l : signal_map.flat())
    if (l < 0.0) throw InvalidArgument("signal strengths must be >= 0");
  // p0 = 1 is allowed for generation (degenerate all-zero tables); model
  // fitting requires p0 < 1.
  if (zero_inflation < 0.0 || zero_inflation > 1.0)
    throw InvalidArgument("p0 must lie in [0, 1]");
}

BoolGrid SimScenario::truth() const {
  BoolGrid t(n_aes, n_drugs, 0);
  for (std::size_t i = 0; i < n_aes; ++i)
    for (std::size_t j = 0; j < n_drugs; ++j)
      t(i, j) = signal_map(i, j) > 1.0 ? 1 : 0;
  return t;
}

ContingencyTable gen_null_conditional(const SimScenario& scenario,
                                      std::uint64_t table_index) {
  scenario.validate();
  const double row_sum = std::accumulate(scenario.row_marginals.begin(),
                                         scenario.row_marginals.end(), 0.0);
  if (row_sum <= 0.0) throw InvalidArgument("row marginals must have mass");

  Grid<std::int64_t> counts(scenario.n_aes, scenario.n_drugs, 0);
  for (std::size_t j = 0; j < scenario.n_drugs; ++j) {
    SplitRng rng(scenario.seed, table_index, j + 1);
    const auto col =
        sample_multinomial(rng, scenario.col_totals[j], scenario.row_marginals);
    for (std::size_t i = 0; i < scenario.n_aes; ++i) counts(i, j) = col[i];
  }
  return ContingencyTable(index_labels("AE", scenario.n_aes),
                          index_labels("drug", scenario.n_drugs),
                          std::move(counts));
}

ContingencyTable gen_poisson_table(const SimScenario& scenario,
                                   std::uint64_t table_index) {
  scenario.validate();
  const double row_sum = std::accumulate(scenario.row_marginals.begin(),
                                         scenario.row_marginals.end(), 0.0);
  if (row_sum <= 0.0) throw InvalidArgument("row marginals must have mass");

  Grid<std::int64_t> counts(scenario.n_aes, scenario.n_drugs, 0);
  for (std::size_t i = 0; i < scenario.n_aes; ++i) {
    for (std::size_t j = 0; j < scenario.n_drugs; ++j) {
      const double e = scenario.row_marginals[i] *
                       static_cast<double>(scenario.col_totals[j]) / row_sum;
      // Cell streams live in a separate id block from the column streams of
      // gen_null_conditional so the two samplers never share draws.
      SplitRng rng(scenario.seed, table_index,
                   (1ULL << 32) + i * scenario.n_drugs + j);
      counts(i, j) =
          sample_zip(rng, scenario.signal_map(i, j) * e, scenario.zero_inflation);
    }
  }
  return ContingencyTable(index_labels("AE", scenario.n_aes),
                          index_labels("drug", scenario.n_drugs),
                          std::move(counts));
}

MetricReport score(const BoolGrid& decisions, const BoolGrid& truth) {
  if (decisions.rows() != truth.rows() || decisions.cols() != truth.cols())
    throw InvalidArgument("decision and truth shapes differ");
  MetricReport r;
  for (std::size_t i = 0; i < decisions.rows(); ++i) {
    for (std::size_t j = 0; j < decisions.cols(); ++j) {
      const bool d = decisions(i, j) != 0;
      const bool t = truth(i, j) != 0;
      if (d && t) ++r.tp;
      else if (d && !t) ++r.fp;
      else if (!d && t) ++r.fn;
      else ++r.tn;
    }
  }
  r.fdr = static_cast<double>(r.fp) /
          static_cast<double>(std::max<std::int64_t>(r.tp + r.fp, 1));
  r.sensitivity = static_cast<double>(r.tp) /
                  static_cast<double>(std::max<std::int64_t>(r.tp + r.fn, 1));
  r.type_i_error = static_cast<double>(r.fp) /
                   static_cast<double>(std::max<std::int64_t>(r.fp + r.tn, 1));
  return r;
}

}  // namespace pvkit
