#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace pvkit {

// Golden-section maximization of a unimodal function on [lo, hi] to absolute
// tolerance tol on the argument.
double golden_section_max(const std::function<double(double)>& f, double lo,
                          double hi, double tol);

struct BfgsResult {
  std::vector<double> x;
  double value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  // Objective after each accepted step (line searches only accept ascent).
  std::vector<double> trace;
};

struct BfgsOptions {
  std::size_t max_iterations = 400;
  double gradient_tol = 1e-8;
  double step_tol = 1e-12;
  double fd_step = 1e-6;  // central-difference step
};

// Quasi-Newton (BFGS) maximization with a numeric central-difference gradient
// and Armijo backtracking. Suited to the small smooth problems here (a
// handful of transformed hyperparameters).
BfgsResult bfgs_max(const std::function<double(std::span<const double>)>& f,
                    std::vector<double> x0, const BfgsOptions& opts = {});

}  // namespace pvkit
