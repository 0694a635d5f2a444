#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "pvkit/ebayes.hpp"
#include "pvkit/errors.hpp"
#include "pvkit/mathutil.hpp"

namespace pvkit {

namespace {

constexpr double kNormFloor = 1e-8;  // guards the norm penalty at alpha = 0

// Natural cubic spline basis over x with df columns: the linear term plus
// df-1 curvature terms, boundary knots at the extremes and internal knots at
// equally spaced quantiles. Columns are centered and scaled over the grid.
Eigen::MatrixXd natural_spline_basis(const std::vector<double>& x,
                                     std::size_t df) {
  const std::size_t k = x.size();
  const std::size_t m = df + 1;  // total knots
  if (k < m) throw InvalidArgument("support too small for the spline basis");

  std::vector<double> sorted(x);
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> knots(m);
  for (std::size_t t = 0; t < m; ++t) {
    const double q = static_cast<double>(t) / static_cast<double>(m - 1);
    const double pos = q * static_cast<double>(k - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, k - 1);
    const double frac = pos - static_cast<double>(lo);
    knots[t] = sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
  }
  for (std::size_t t = 1; t < m; ++t)
    if (!(knots[t] > knots[t - 1]))
      knots[t] = knots[t - 1] + 1e-9 * (1.0 + std::fabs(knots[t - 1]));

  const auto cube_pos = [](double v) { return v > 0.0 ? v * v * v : 0.0; };
  const auto dk = [&](double xv, std::size_t t) {
    return (cube_pos(xv - knots[t]) - cube_pos(xv - knots[m - 1])) /
           (knots[m - 1] - knots[t]);
  };

  Eigen::MatrixXd q(k, df);
  for (std::size_t i = 0; i < k; ++i) {
    q(static_cast<Eigen::Index>(i), 0) = x[i];
    for (std::size_t t = 0; t + 2 < m; ++t)
      q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t + 1)) =
          dk(x[i], t) - dk(x[i], m - 2);
  }

  for (Eigen::Index c = 0; c < q.cols(); ++c) {
    const double mean = q.col(c).mean();
    q.col(c).array() -= mean;
    const double sd = std::sqrt(q.col(c).squaredNorm() /
                                static_cast<double>(k));
    if (sd > 1e-12) q.col(c) /= sd;
  }
  return q;
}

struct EfronModel {
  Eigen::MatrixXd q;        // K x p structure matrix
  Eigen::MatrixXd log_pois; // n x K scaled kernel in log space
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t p = 0;

  Eigen::VectorXd masses(const Eigen::VectorXd& alpha, double* phi) const {
    Eigen::VectorXd y = q * alpha;
    const double m = y.maxCoeff();
    Eigen::VectorXd g = (y.array() - m).exp();
    const double z = g.sum();
    g /= z;
    if (phi) *phi = m + std::log(z);
    return g;
  }

  // Unpenalized marginal log-likelihood and per-cell posterior weights.
  double loglik(const Eigen::VectorXd& g, Eigen::MatrixXd* w) const {
    double ll = 0.0;
    if (w) w->resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
    Eigen::VectorXd logg = g.array().max(1e-300).log();
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = log_pois.row(static_cast<Eigen::Index>(i));
      Eigen::VectorXd terms = row.transpose() + logg;
      const double m = terms.maxCoeff();
      Eigen::VectorXd et = (terms.array() - m).exp();
      const double z = et.sum();
      ll += m + std::log(z);
      if (w) w->row(static_cast<Eigen::Index>(i)) = (et / z).transpose();
    }
    return ll;
  }

  double penalty(const Eigen::VectorXd& alpha, double c0) const {
    return c0 * std::max(alpha.norm(), 0.0);
  }

  double penalized(const Eigen::VectorXd& alpha, double c0) const {
    return loglik(masses(alpha, nullptr), nullptr) - penalty(alpha, c0);
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& alpha, double c0,
                           const Eigen::VectorXd& g,
                           const Eigen::MatrixXd& w) const {
    Eigen::VectorXd wbar = w.colwise().sum().transpose();
    Eigen::VectorXd grad =
        q.transpose() * (wbar - static_cast<double>(n) * g);
    const double norm = std::max(alpha.norm(), kNormFloor);
    grad -= (c0 / norm) * alpha;
    return grad;
  }

  // Hessian of the data term: sum_i Q^T (diag(w_i) - w_i w_i^T) Q
  //                          - n Q^T (diag(g) - g g^T) Q.
  Eigen::MatrixXd data_hessian(const Eigen::VectorXd& g,
                               const Eigen::MatrixXd& w) const {
    Eigen::VectorXd wbar = w.colwise().sum().transpose();
    Eigen::MatrixXd h =
        q.transpose() * wbar.asDiagonal() * q;
    Eigen::MatrixXd s = w * q;  // n x p, rows s_i = Q^T w_i
    h -= s.transpose() * s;
    Eigen::MatrixXd hg = q.transpose() * g.asDiagonal() * q;
    Eigen::VectorXd qg = q.transpose() * g;
    hg -= qg * qg.transpose();
    h -= static_cast<double>(n) * hg;
    return h;
  }

  Eigen::MatrixXd penalty_hessian(const Eigen::VectorXd& alpha,
                                  double c0) const {
    const double norm = std::max(alpha.norm(), kNormFloor);
    Eigen::MatrixXd h = Eigen::MatrixXd::Identity(
        static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    h /= norm;
    h -= alpha * alpha.transpose() / (norm * norm * norm);
    return c0 * h;
  }
};

EfronModel build_model(const CellData& cells, std::span<const double> support,
                       std::size_t df) {
  EfronModel model;
  model.n = cells.n.size();
  model.k = support.size();
  model.p = df;

  std::vector<double> logx(support.size());
  for (std::size_t t = 0; t < support.size(); ++t) {
    if (!(support[t] > 0.0))
      throw InvalidArgument("Efron support points must be positive");
    logx[t] = std::log(support[t]);
  }
  model.q = natural_spline_basis(logx, df);

  model.log_pois.resize(static_cast<Eigen::Index>(model.n),
                        static_cast<Eigen::Index>(model.k));
  for (std::size_t i = 0; i < model.n; ++i)
    for (std::size_t t = 0; t < model.k; ++t)
      model.log_pois(static_cast<Eigen::Index>(i),
                     static_cast<Eigen::Index>(t)) =
          log_poisson_pmf(cells.n[i], support[t] * cells.e[i]);
  return model;
}

}  // namespace

EfronPrior fit_efron(const CellData& cells, std::span<const double> support,
                     double c0, std::size_t spline_df) {
  if (spline_df < 2) throw InvalidArgument("spline_df must be >= 2");
  if (!(c0 > 0.0)) throw InvalidArgument("c0 must be positive");
  if (support.size() <= spline_df)
    throw InvalidArgument("support must be larger than spline_df");
  if (cells.n.empty()) throw InvalidArgument("no cells to fit");

  const EfronModel model = build_model(cells, support, spline_df);
  const auto pi = static_cast<Eigen::Index>(spline_df);

  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(pi);
  double obj = model.penalized(alpha, c0);

  FitInfo info;
  info.method = "efron";
  info.tolerance = 1e-6;
  info.objective_trace.push_back(obj);

  constexpr std::size_t kMaxIter = 200;
  bool converged = false;
  for (std::size_t iter = 0; iter < kMaxIter; ++iter) {
    info.iterations = iter + 1;
    Eigen::VectorXd g = model.masses(alpha, nullptr);
    Eigen::MatrixXd w;
    model.loglik(g, &w);
    const Eigen::VectorXd grad = model.gradient(alpha, c0, g, w);
    if (grad.norm() < 1e-6) {
      converged = true;
      break;
    }

    Eigen::MatrixXd neg_h =
        -(model.data_hessian(g, w) - model.penalty_hessian(alpha, c0));
    // Scoring step with a ridge boost whenever the solve is unusable.
    Eigen::VectorXd dir;
    double ridge = 0.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
      Eigen::MatrixXd m = neg_h;
      if (ridge > 0.0)
        m += ridge * Eigen::MatrixXd::Identity(pi, pi);
      Eigen::LDLT<Eigen::MatrixXd> ldlt(m);
      if (ldlt.info() == Eigen::Success) {
        dir = ldlt.solve(grad);
        if (dir.allFinite() && dir.dot(grad) > 0.0) break;
      }
      dir.resize(0);
      ridge = ridge == 0.0 ? 1e-4 * (1.0 + neg_h.diagonal().cwiseAbs().maxCoeff())
                           : ridge * 10.0;
    }
    if (dir.size() == 0)
      throw FitFailure("Efron scoring step is singular beyond ridge repair");

    // Line search keeps the objective trace non-decreasing.
    double step = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      const Eigen::VectorXd trial = alpha + step * dir;
      const double val = model.penalized(trial, c0);
      if (std::isfinite(val) && val >= obj) {
        alpha = trial;
        obj = val;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      converged = grad.norm() < 1e-4;
      break;
    }
    info.objective_trace.push_back(obj);
  }

  info.converged = converged;
  info.final_objective = obj;

  EfronPrior prior;
  prior.support.assign(support.begin(), support.end());
  prior.coefficients.assign(alpha.data(), alpha.data() + alpha.size());
  prior.spline_df = spline_df;
  prior.penalty = c0;
  prior.structure.resize(model.q.size());
  for (std::size_t i = 0; i < support.size(); ++i)
    for (std::size_t t = 0; t < spline_df; ++t)
      prior.structure[i * spline_df + t] =
          model.q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t));
  double phi = 0.0;
  const Eigen::VectorXd g = model.masses(alpha, &phi);
  prior.normalizer = phi;
  prior.masses.assign(g.data(), g.data() + g.size());
  prior.fit = std::move(info);
  return prior;
}

EfronPrior fit_efron(const ContingencyTable& table, const BaselineMatrix& E,
                     std::span<const double> support, double c0,
                     std::size_t spline_df) {
  return fit_efron(flatten_cells(table, E), support, c0, spline_df);
}

double efron_aic(const EfronPrior& fit, const CellData& cells) {
  if (!fit.fit.converged)
    throw AicFailure("AIC requires a converged Efron fit");
  const EfronModel model = build_model(cells, fit.support, fit.spline_df);
  const auto pi = static_cast<Eigen::Index>(fit.spline_df);

  Eigen::VectorXd alpha(pi);
  for (Eigen::Index t = 0; t < pi; ++t)
    alpha(t) = fit.coefficients[static_cast<std::size_t>(t)];

  Eigen::VectorXd g = model.masses(alpha, nullptr);
  Eigen::MatrixXd w;
  const double ll0 = model.loglik(g, &w);

  const Eigen::MatrixXd h_data = model.data_hessian(g, w);
  const Eigen::MatrixXd h_pen =
      h_data - model.penalty_hessian(alpha, fit.penalty);

  Eigen::FullPivLU<Eigen::MatrixXd> lu(h_pen);
  if (!lu.isInvertible())
    throw AicFailure("penalized Hessian is singular at the fitted point");
  const Eigen::MatrixXd f = lu.solve(h_data);
  return 2.0 * f.trace() - 2.0 * ll0;
}

double efron_aic(const EfronPrior& fit, const ContingencyTable& table,
                 const BaselineMatrix& E) {
  return efron_aic(fit, flatten_cells(table, E));
}

EfronSelection select_efron(const CellData& cells,
                            std::span<const double> support) {
  static constexpr double kC0Grid[] = {0.1, 0.5, 1.0, 2.0, 5.0};
  EfronSelection sel;
  double best_aic = std::numeric_limits<double>::infinity();
  for (const double c0 : kC0Grid) {
    for (std::size_t p = 3; p <= 8; ++p) {
      EfronPrior fit;
      double aic;
      try {
        fit = fit_efron(cells, support, c0, p);
        aic = efron_aic(fit, cells);
      } catch (const Error&) {
        continue;  // skip grid points that fail to fit
      }
      sel.scanned.push_back({c0, p, aic});
      if (aic < best_aic) {
        best_aic = aic;
        sel.best = std::move(fit);
      }
    }
  }
  if (!std::isfinite(best_aic))
    throw FitFailure("no Efron fit succeeded on the hyperparameter grid");
  return sel;
}

}  // namespace pvkit
