#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pvkit/bcpnn.hpp"
#include "pvkit/disprop.hpp"
#include "pvkit/ebayes.hpp"
#include "pvkit/lrt.hpp"
#include "pvkit/simulate.hpp"

namespace pvkit {

// ---------------------------------------------------------------------------
// Result CSV schemas (one per analysis family)
// ---------------------------------------------------------------------------

// `ae,drug,method,estimate,ci_low,ci_high,defined,flag`; undefined cells
// leave the numeric fields empty.
void write_disprop_csv(std::ostream& out, const ContingencyTable& table,
                       const Grid<DisproportionalityResult>& results,
                       const BoolGrid& flags, const std::string& method);

// `ae,drug,ic_mean,ic_var,ic025,flag`
void write_ic_csv(std::ostream& out, const ContingencyTable& table,
                  const Grid<IcResult>& results, const BoolGrid& flags);

// `drug,statistic,p_value,decision,argmax_ae,reps,seed,model`
void write_test_results_csv(std::ostream& out, const ContingencyTable& table,
                            const std::vector<ColumnTestResult>& results,
                            const std::string& model);

// `ae,drug,N,E,median,q05,q95,prob_signal,decision,method`
void write_posterior_csv(std::ostream& out, const ContingencyTable& table,
                         const BaselineMatrix& E, const EbTableResult& result,
                         const std::string& method);

// ---------------------------------------------------------------------------
// JSON documents
// ---------------------------------------------------------------------------

std::string prior_to_json(const MixturePrior& prior);
MixturePrior prior_from_json(const std::string& text);

std::string efron_prior_to_json(const EfronPrior& prior);

// Scenario files: dimensions, marginals, sparse signal list, p0, seed.
std::string scenario_to_json(const SimScenario& scenario);
SimScenario scenario_from_json(const std::string& text);
SimScenario scenario_from_json_file(const std::string& path);

// Heatmap cells: N, E and one significance measure per cell.
struct HeatmapCell {
  std::string ae;
  std::string drug;
  std::int64_t n = 0;
  double e = 0.0;
  double measure = 0.0;
  bool signal = false;
};

std::string heatmap_to_json(const std::string& method,
                            const std::string& measure_name,
                            const std::vector<HeatmapCell>& cells);

// Eyeplot entries carry the posterior median with the 90% equi-tailed
// credible interval; non-signal cells are excluded by the caller.
struct EyeplotCell {
  std::string ae;
  std::string drug;
  std::int64_t n = 0;
  double e = 0.0;
  double median = 0.0;
  double q05 = 0.0;
  double q95 = 0.0;
};

std::string eyeplot_to_json(const std::string& method,
                            const std::vector<EyeplotCell>& cells);

std::string metric_report_to_json(
    const std::vector<std::pair<std::string, MetricReport>>& per_method);

}  // namespace pvkit
