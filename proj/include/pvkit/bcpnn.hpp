#pragma once

#include "pvkit/grid.hpp"
#include "pvkit/table.hpp"

namespace pvkit {

// Information component with its posterior-normal approximation.
struct IcResult {
  double ic_mean = 0.0;      // log2 units
  double ic_variance = 0.0;
  double ic025 = 0.0;        // ic_mean - 1.96 * sd
  double beta_hat = 0.0;     // estimated Beta(1, beta) prior parameter
};

// Prior parameter chosen so the prior mean of p_ij equals the product of the
// posterior means of the marginal probabilities:
// beta_hat = (N..+2)^2 / ((Ni.+1)(N.j+1)) - 1.
double estimate_beta(const ContingencyTable& table, std::size_t i,
                     std::size_t j);

// IC mean/variance for every cell via the posterior-normal plug-in formulas.
Grid<IcResult> ic(const ContingencyTable& table);

// Decision per cell: ic025 > threshold (0 by standard practice).
BoolGrid bcpnn_signals(const Grid<IcResult>& results, double threshold = 0.0);

}  // namespace pvkit
