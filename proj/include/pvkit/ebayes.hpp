#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pvkit/grid.hpp"
#include "pvkit/table.hpp"

namespace pvkit {

struct GammaComponent {
  double shape = 1.0;   // alpha > 0
  double rate = 1.0;    // beta > 0
  double weight = 1.0;  // omega in [0,1]
};

// Convergence record kept with every fitted prior.
struct FitInfo {
  std::string method;
  std::size_t iterations = 0;
  double final_objective = 0.0;
  double tolerance = 0.0;
  bool converged = false;
  // Objective after every accepted iteration; non-decreasing up to 1e-8.
  std::vector<double> objective_trace;
};

// Prior over the signal strength lambda: either a finite gamma mixture or a
// discrete distribution on a fixed support grid.
struct MixturePrior {
  enum class Kind { GammaMixture, DiscreteGrid };
  Kind kind = Kind::GammaMixture;
  std::vector<GammaComponent> components;  // gamma mixture
  std::vector<double> support;             // discrete grid
  std::vector<double> masses;              // discrete grid
  FitInfo fit;
};

// Number of mixture weights above the activity threshold.
std::size_t active_components(const MixturePrior& prior, double tol = 1e-6);

// Exponential-family prior on a fixed grid: g = exp(Q alpha - phi(alpha)).
struct EfronPrior {
  std::vector<double> support;       // K grid points
  std::vector<double> coefficients;  // alpha, p entries
  std::vector<double> structure;     // Q, K x p row-major
  std::vector<double> masses;        // g(alpha), cached
  std::size_t spline_df = 0;         // p
  double penalty = 0.0;              // c0
  double normalizer = 0.0;           // phi(alpha)
  FitInfo fit;

  MixturePrior as_discrete() const;
};

// Per-cell posterior summary of lambda.
struct PosteriorSummary {
  MixturePrior representation;  // updated components or grid masses
  double mean = 0.0;
  double median = 0.0;
  double q05 = 0.0;
  double q95 = 0.0;
  double prob_signal = 0.0;  // P(lambda > 1 + epsilon | N)
  double epsilon = 1e-3;
  bool prior_only = false;   // E == 0: posterior equals the prior
};

// log marginal P(N = n) of a Poisson(lambda*E) count under a
// Gamma(shape, rate) prior on lambda (negative binomial). E == 0 collapses
// to a point mass at zero.
double nb_log_marginal(std::int64_t n, double shape, double rate, double e);
double nb_marginal(std::int64_t n, double shape, double rate, double e);

// ---------------------------------------------------------------------------
// Fitters. Table overloads flatten to (N, E) cell lists; cells with E == 0
// are excluded from every fitting likelihood.
// ---------------------------------------------------------------------------

struct CellData {
  std::vector<std::int64_t> n;
  std::vector<double> e;
};

CellData flatten_cells(const ContingencyTable& table, const BaselineMatrix& E);

MixturePrior fit_single_gamma(const CellData& cells);
MixturePrior fit_single_gamma(const ContingencyTable& table,
                              const BaselineMatrix& E);

// Two-component gamma mixture by marginal maximum likelihood: multi-start
// quasi-Newton on log shapes/rates and the logit weight. Components are
// returned sorted by prior mean.
MixturePrior fit_gps(const CellData& cells);
MixturePrior fit_gps(const ContingencyTable& table, const BaselineMatrix& E);

struct GeneralGammaOptions {
  std::size_t n_components = 100;  // K
  double dirichlet_alpha = 0.5;    // in (0,1)
  std::size_t max_iterations = 2000;
  double rel_tol = 1e-8;
  unsigned threads = 1;
};

// Overfitted K-component gamma mixture with a Dirichlet(alpha < 1) weight
// prior, fitted by expectation conditional maximization. The MAP weight
// update shrinks redundant weights to exactly zero; weights below 1e-6 are
// frozen at zero after iteration 50.
MixturePrior fit_general_gamma(const CellData& cells,
                               const GeneralGammaOptions& opts = {});
MixturePrior fit_general_gamma(const ContingencyTable& table,
                               const BaselineMatrix& E,
                               const GeneralGammaOptions& opts = {});

// Histogram-equalized support grid over the observed N/E ratios. The span is
// [max(1e-4, min ratio), 2 * quantile(0.999)] and the points sit at equally
// spaced quantiles with the span floor and 1 forcibly included.
std::vector<double> select_grid(const CellData& cells, std::size_t k);
std::vector<double> select_grid(const ContingencyTable& table,
                                const BaselineMatrix& E, std::size_t k);

// Nonparametric MLE of the prior masses on a fixed support, by EM
// (multiplicative updates); the objective is non-decreasing per iteration.
MixturePrior fit_km(const CellData& cells, std::span<const double> support);
MixturePrior fit_km(const ContingencyTable& table, const BaselineMatrix& E,
                    std::span<const double> support);

// Ridge-penalized exponential-family prior, fitted by Fisher scoring with a
// line search. Q is a natural cubic spline basis in log(support) with
// spline_df degrees of freedom and knots at equally spaced quantiles;
// columns are centered and scaled.
EfronPrior fit_efron(const CellData& cells, std::span<const double> support,
                     double c0, std::size_t spline_df);
EfronPrior fit_efron(const ContingencyTable& table, const BaselineMatrix& E,
                     std::span<const double> support, double c0,
                     std::size_t spline_df);

// AIC = 2 trace(F) - 2 log L0(alpha), with F the degrees-of-freedom matrix
// H_pen^{-1} H_unpen at the fitted coefficients.
double efron_aic(const EfronPrior& fit, const CellData& cells);
double efron_aic(const EfronPrior& fit, const ContingencyTable& table,
                 const BaselineMatrix& E);

struct EfronScanEntry {
  double c0 = 0.0;
  std::size_t spline_df = 0;
  double aic = 0.0;
};

struct EfronSelection {
  EfronPrior best;
  std::vector<EfronScanEntry> scanned;
};

// Grid search over c0 in {0.1, 0.5, 1, 2, 5} and spline_df in {3..8},
// keeping the minimum-AIC fit.
EfronSelection select_efron(const CellData& cells,
                            std::span<const double> support);

// ---------------------------------------------------------------------------
// Posterior inference.
// ---------------------------------------------------------------------------

// Conjugate (gamma mixture) or exact discrete posterior update for one cell.
// Quantiles are solved on the mixture CDF to 1e-10. E == 0 returns the prior
// itself with prior_only set.
PosteriorSummary posterior_cell(const MixturePrior& prior, std::int64_t n,
                                double e, double epsilon = 1e-3);
PosteriorSummary posterior_cell(const EfronPrior& prior, std::int64_t n,
                                double e, double epsilon = 1e-3);

struct EbRule {
  enum class Kind { ProbSignal, Q05Threshold };
  Kind kind = Kind::ProbSignal;
  double threshold = 0.95;  // prob cutoff, or the Q05 bound (e.g. EB05 > 2)
  double epsilon = 1e-3;
};

struct EbTableResult {
  Grid<PosteriorSummary> cells;
  BoolGrid decisions;
};

// Posterior summary and decision for every cell of the table.
EbTableResult eb_signal_table(const MixturePrior& prior,
                              const ContingencyTable& table,
                              const BaselineMatrix& E, const EbRule& rule);
EbTableResult eb_signal_table(const EfronPrior& prior,
                              const ContingencyTable& table,
                              const BaselineMatrix& E, const EbRule& rule);

}  // namespace pvkit
