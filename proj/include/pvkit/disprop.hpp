#pragma once

#include "pvkit/grid.hpp"
#include "pvkit/table.hpp"

namespace pvkit {

// Point estimate with 95% confidence interval. `defined` is false whenever a
// zero count makes the estimator or its variance ill-defined; no continuity
// correction is applied.
struct DisproportionalityResult {
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool defined = false;
};

// Proportional reporting ratio for every cell.
Grid<DisproportionalityResult> prr(const ContingencyTable& table);

// Reporting odds ratio for every cell.
Grid<DisproportionalityResult> ror(const ContingencyTable& table);

struct ThresholdRule {
  enum class Target { Estimate, CiLow };
  Target target = Target::CiLow;
  double threshold = 1.0;
};

// Per-cell decision under the rule; undefined cells are never flagged.
BoolGrid flag_signals(const Grid<DisproportionalityResult>& results,
                      const ThresholdRule& rule);

}  // namespace pvkit
