#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "pvkit/ebayes.hpp"
#include "pvkit/errors.hpp"
#include "pvkit/mathutil.hpp"
#include "pvkit/optim.hpp"
#include "pvkit/parallel.hpp"

namespace pvkit {

namespace {

constexpr double kLogParamMin = -18.0;  // exp bounds for shapes/rates
constexpr double kLogParamMax = 18.0;

double clamp_exp(double t) {
  return std::exp(std::clamp(t, kLogParamMin, kLogParamMax));
}

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

void sort_by_mean(std::vector<GammaComponent>& comps) {
  std::stable_sort(comps.begin(), comps.end(),
                   [](const GammaComponent& a, const GammaComponent& b) {
                     return a.shape / a.rate < b.shape / b.rate;
                   });
}

// Rough moment summary of the N/E ratios, used to seed optimizer starts.
struct RatioMoments {
  double mean = 1.0;
  double var = 1.0;
};

RatioMoments ratio_moments(const CellData& cells) {
  RatioMoments m;
  if (cells.n.empty()) return m;
  double s = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < cells.n.size(); ++i) {
    const double r = static_cast<double>(cells.n[i]) / cells.e[i];
    s += r;
    s2 += r * r;
  }
  const double n = static_cast<double>(cells.n.size());
  m.mean = std::max(1e-3, s / n);
  m.var = std::max(1e-3, s2 / n - m.mean * m.mean);
  return m;
}

}  // namespace

MixturePrior fit_single_gamma(const CellData& cells) {
  if (cells.n.size() < 2) throw FitFailure("too few cells for a gamma fit");

  const auto objective = [&](std::span<const double> t) {
    const double shape = clamp_exp(t[0]);
    const double rate = clamp_exp(t[1]);
    double ll = 0.0;
    for (std::size_t i = 0; i < cells.n.size(); ++i)
      ll += nb_log_marginal(cells.n[i], shape, rate, cells.e[i]);
    return ll;
  };

  const RatioMoments m = ratio_moments(cells);
  // Moments of a gamma prior: mean = a/b, var >= mean^2/a.
  const double a0 = std::clamp(m.mean * m.mean / m.var, 1e-2, 1e3);
  const std::vector<std::vector<double>> starts = {
      {std::log(a0), std::log(a0 / m.mean)},
      {0.0, 0.0},
      {std::log(2.0), std::log(2.0)},
      {std::log(0.5), std::log(0.5)},
  };

  BfgsResult best;
  best.value = -std::numeric_limits<double>::infinity();
  for (const auto& s : starts) {
    BfgsResult r = bfgs_max(objective, s);
    if (r.value > best.value) best = std::move(r);
  }
  if (!std::isfinite(best.value))
    throw FitFailure("single-gamma fit failed from every start");

  MixturePrior prior;
  prior.kind = MixturePrior::Kind::GammaMixture;
  prior.components = {
      {clamp_exp(best.x[0]), clamp_exp(best.x[1]), 1.0}};
  prior.fit.method = "single-gamma";
  prior.fit.iterations = best.iterations;
  prior.fit.final_objective = best.value;
  prior.fit.converged = best.converged;
  prior.fit.objective_trace = std::move(best.trace);
  return prior;
}

MixturePrior fit_single_gamma(const ContingencyTable& table,
                              const BaselineMatrix& E) {
  return fit_single_gamma(flatten_cells(table, E));
}

// ---------------------------------------------------------------------------
// GPS: two-gamma mixture by marginal maximum likelihood
// ---------------------------------------------------------------------------

MixturePrior fit_gps(const CellData& cells) {
  if (cells.n.size() < 10)
    throw FitFailure("need at least 10 cells to fit the 2-gamma prior");

  // theta = (log a1, log b1, log a2, log b2, logit omega)
  const auto objective = [&](std::span<const double> t) {
    const double a1 = clamp_exp(t[0]);
    const double b1 = clamp_exp(t[1]);
    const double a2 = clamp_exp(t[2]);
    const double b2 = clamp_exp(t[3]);
    const double w = sigmoid(t[4]);
    if (w <= 0.0 || w >= 1.0) return -std::numeric_limits<double>::infinity();
    const double lw1 = std::log(w);
    const double lw2 = std::log1p(-w);
    double ll = 0.0;
    for (std::size_t i = 0; i < cells.n.size(); ++i) {
      const double l1 = lw1 + nb_log_marginal(cells.n[i], a1, b1, cells.e[i]);
      const double l2 = lw2 + nb_log_marginal(cells.n[i], a2, b2, cells.e[i]);
      ll += log_add(l1, l2);
    }
    return ll;
  };

  const RatioMoments m = ratio_moments(cells);
  const double logit09 = std::log(0.9 / 0.1);
  const double logit07 = std::log(0.7 / 0.3);
  const std::vector<std::vector<double>> starts = {
      {std::log(20.0), std::log(20.0), std::log(4.0), std::log(1.0), logit09},
      {std::log(10.0), std::log(10.0), std::log(2.0), std::log(0.5), logit07},
      {std::log(1.0), std::log(1.0), std::log(1.0), std::log(0.2), 0.0},
      {std::log(50.0), std::log(50.0), std::log(5.0), std::log(2.0),
       std::log(0.95 / 0.05)},
      {std::log(2.0), std::log(2.0), std::log(8.0), std::log(8.0 / m.mean),
       logit07},
  };

  BfgsResult best;
  best.value = -std::numeric_limits<double>::infinity();
  for (const auto& s : starts) {
    BfgsResult r = bfgs_max(objective, s);
    if (std::isfinite(r.value) && r.value > best.value) best = std::move(r);
  }
  if (!std::isfinite(best.value))
    throw FitFailure("2-gamma fit failed to converge from every start");

  const double w = sigmoid(best.x[4]);
  MixturePrior prior;
  prior.kind = MixturePrior::Kind::GammaMixture;
  prior.components = {
      {clamp_exp(best.x[0]), clamp_exp(best.x[1]), w},
      {clamp_exp(best.x[2]), clamp_exp(best.x[3]), 1.0 - w}};
  sort_by_mean(prior.components);
  prior.fit.method = "gps";
  prior.fit.iterations = best.iterations;
  prior.fit.final_objective = best.value;
  prior.fit.converged = best.converged;
  prior.fit.objective_trace = std::move(best.trace);
  return prior;
}

MixturePrior fit_gps(const ContingencyTable& table, const BaselineMatrix& E) {
  return fit_gps(flatten_cells(table, E));
}

// ---------------------------------------------------------------------------
// General-gamma: sparse overfitted mixture by ECM
// ---------------------------------------------------------------------------

namespace {

// Weight floor inside the Dirichlet penalty so dead components keep a fixed,
// finite contribution and the tracked objective stays comparable across
// death events.
constexpr double kPenaltyFloor = 1e-12;

struct EcmState {
  std::vector<double> shape;   // r_k
  std::vector<double> scale;   // h_k (rate = 1/h_k)
  std::vector<double> weight;  // omega_k, zeros for dead components
};

double penalized_objective(const CellData& cells, const EcmState& st,
                           double dirichlet_alpha, unsigned threads,
                           std::vector<double>* log_f_out = nullptr) {
  const std::size_t n = cells.n.size();
  const std::size_t k = st.weight.size();
  std::vector<double> log_f(n, 0.0);
  std::vector<double> logw(k);
  for (std::size_t t = 0; t < k; ++t)
    logw[t] = st.weight[t] > 0.0
                  ? std::log(st.weight[t])
                  : -std::numeric_limits<double>::infinity();

  parallel_for(n, threads, [&](std::size_t i) {
    double acc = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < k; ++t) {
      if (st.weight[t] <= 0.0) continue;
      acc = log_add(acc, logw[t] + nb_log_marginal(cells.n[i], st.shape[t],
                                                   1.0 / st.scale[t],
                                                   cells.e[i]));
    }
    log_f[i] = acc;
  });

  double ll = 0.0;
  for (double v : log_f) ll += v;
  double pen = 0.0;
  for (std::size_t t = 0; t < k; ++t)
    pen += (dirichlet_alpha - 1.0) *
           std::log(std::max(st.weight[t], kPenaltyFloor));
  if (log_f_out) *log_f_out = std::move(log_f);
  return ll + pen;
}

// Expected complete-data log-likelihood for one component and its gradient /
// Hessian in (shape r, u = e*h) terms, accumulated over cells.
struct ComponentScore {
  double value = 0.0;
  double gr = 0.0, gh = 0.0;      // gradient wrt (r, h)
  double hrr = 0.0, hrh = 0.0, hhh = 0.0;
};

ComponentScore component_score(const CellData& cells,
                               std::span<const double> resp, double r,
                               double h) {
  ComponentScore s;
  const double lg_r = std::lgamma(r);
  const double dg_r = boost::math::digamma(r);
  const double tg_r = boost::math::trigamma(r);
  for (std::size_t i = 0; i < cells.n.size(); ++i) {
    const double w = resp[i];
    if (w <= 0.0) continue;
    const double dn = static_cast<double>(cells.n[i]);
    const double u = cells.e[i] * h;
    const double log1pu = std::log1p(u);
    s.value += w * (std::lgamma(dn + r) - lg_r - std::lgamma(dn + 1.0) -
                    r * log1pu + dn * (std::log(u) - log1pu));
    const double dr = boost::math::digamma(dn + r) - dg_r - log1pu;
    const double du = dn / u - (dn + r) / (1.0 + u);
    s.gr += w * dr;
    s.gh += w * du * cells.e[i];
    s.hrr += w * (boost::math::trigamma(dn + r) - tg_r);
    s.hrh += w * (-1.0 / (1.0 + u)) * cells.e[i];
    s.hhh += w * (-dn / (u * u) + (dn + r) / ((1.0 + u) * (1.0 + u))) *
             cells.e[i] * cells.e[i];
  }
  return s;
}

// One safeguarded Newton step on (r_k, h_k), accepted only if the expected
// complete-data objective does not decrease.
void update_component(const CellData& cells, std::span<const double> resp,
                      double& r, double& h) {
  const ComponentScore s0 = component_score(cells, resp, r, h);
  const double det = s0.hrr * s0.hhh - s0.hrh * s0.hrh;

  double dr, dh;
  if (det > 0.0 && s0.hrr < 0.0) {
    // Newton ascent: solve -H d = g.
    dr = -(s0.hhh * s0.gr - s0.hrh * s0.gh) / det;
    dh = -(s0.hrr * s0.gh - s0.hrh * s0.gr) / det;
  } else {
    // Fall back to a scaled gradient step.
    dr = 0.1 * r * s0.gr / (std::fabs(s0.gr) + 1.0);
    dh = 0.1 * h * s0.gh / (std::fabs(s0.gh) + 1.0);
  }

  double step = 1.0;
  for (int ls = 0; ls < 6; ++ls) {
    const double rn = std::clamp(r + step * dr, 1e-6, 1e6);
    const double hn = std::clamp(h + step * dh, 1e-8, 1e8);
    const ComponentScore s1 = component_score(cells, resp, rn, hn);
    if (s1.value >= s0.value) {
      r = rn;
      h = hn;
      return;
    }
    step *= 0.25;
  }
  // Keep the previous parameters if no trial improved the expectation.
}

}  // namespace

MixturePrior fit_general_gamma(const CellData& cells,
                               const GeneralGammaOptions& opts) {
  if (opts.n_components < 2) throw InvalidArgument("K must be >= 2");
  if (!(opts.dirichlet_alpha > 0.0) || !(opts.dirichlet_alpha < 1.0))
    throw InvalidArgument("dirichlet_alpha must lie in (0,1)");
  if (cells.n.empty()) throw InvalidArgument("no cells to fit");

  const std::size_t n = cells.n.size();
  const std::size_t k = opts.n_components;

  // Spread component means geometrically across the observed ratio range.
  double max_ratio = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    max_ratio = std::max(max_ratio,
                         static_cast<double>(cells.n[i]) / cells.e[i]);
  const double lo_mean = 0.02;
  const double hi_mean = std::max(1.5 * max_ratio, lo_mean * 4.0);

  EcmState st;
  st.shape.resize(k);
  st.scale.resize(k);
  st.weight.assign(k, 1.0 / static_cast<double>(k));
  for (std::size_t t = 0; t < k; ++t) {
    const double frac = k == 1 ? 0.0
                               : static_cast<double>(t) /
                                     static_cast<double>(k - 1);
    const double mean = lo_mean * std::pow(hi_mean / lo_mean, frac);
    st.shape[t] = 2.0;
    st.scale[t] = mean / st.shape[t];
  }

  FitInfo info;
  info.method = "general-gamma";
  info.tolerance = opts.rel_tol;

  std::vector<double> log_f;
  double prev = penalized_objective(cells, st, opts.dirichlet_alpha,
                                    opts.threads, &log_f);
  info.objective_trace.push_back(prev);

  Grid<double> resp(n, k, 0.0);
  std::vector<std::size_t> live;
  for (std::size_t t = 0; t < k; ++t) live.push_back(t);

  for (std::size_t iter = 0; iter < opts.max_iterations; ++iter) {
    info.iterations = iter + 1;

    // E-step: responsibilities, component-parallel for determinism.
    parallel_for(live.size(), opts.threads, [&](std::size_t li) {
      const std::size_t t = live[li];
      const double lw = std::log(st.weight[t]);
      for (std::size_t i = 0; i < n; ++i) {
        resp(i, t) = std::exp(lw +
                              nb_log_marginal(cells.n[i], st.shape[t],
                                              1.0 / st.scale[t], cells.e[i]) -
                              log_f[i]);
      }
    });

    // CM step 1: MAP weights under the Dirichlet prior; the truncation at
    // zero is what shrinks redundant components away.
    std::vector<double> nk(k, 0.0);
    for (const std::size_t t : live)
      for (std::size_t i = 0; i < n; ++i) nk[t] += resp(i, t);
    double wsum = 0.0;
    for (const std::size_t t : live) {
      st.weight[t] = std::max(nk[t] + opts.dirichlet_alpha - 1.0, 0.0);
      wsum += st.weight[t];
    }
    if (wsum <= 0.0) throw FitFailure("all mixture weights collapsed");
    for (const std::size_t t : live) st.weight[t] /= wsum;
    if (iter >= 50) {
      double live_sum = 0.0;
      for (const std::size_t t : live) {
        if (st.weight[t] < 1e-6) st.weight[t] = 0.0;
        live_sum += st.weight[t];
      }
      for (const std::size_t t : live) st.weight[t] /= live_sum;
    }

    // CM step 2: one safeguarded Newton step per live component.
    std::vector<std::size_t> next_live;
    for (const std::size_t t : live)
      if (st.weight[t] > 0.0) next_live.push_back(t);
    parallel_for(next_live.size(), opts.threads, [&](std::size_t li) {
      const std::size_t t = next_live[li];
      std::vector<double> r(n);
      for (std::size_t i = 0; i < n; ++i) r[i] = resp(i, t);
      update_component(cells, r, st.shape[t], st.scale[t]);
    });
    live = std::move(next_live);

    const double cur = penalized_objective(cells, st, opts.dirichlet_alpha,
                                           opts.threads, &log_f);
    info.objective_trace.push_back(cur);
    const double rel = (cur - prev) / (std::fabs(prev) + 1.0);
    const bool done = std::fabs(rel) < opts.rel_tol;
    prev = cur;
    if (done) {
      info.converged = true;
      break;
    }
  }
  info.final_objective = prev;

  MixturePrior prior;
  prior.kind = MixturePrior::Kind::GammaMixture;
  prior.components.reserve(k);
  for (std::size_t t = 0; t < k; ++t)
    prior.components.push_back(
        {st.shape[t], 1.0 / st.scale[t], st.weight[t]});
  sort_by_mean(prior.components);
  prior.fit = std::move(info);
  return prior;
}

MixturePrior fit_general_gamma(const ContingencyTable& table,
                               const BaselineMatrix& E,
                               const GeneralGammaOptions& opts) {
  return fit_general_gamma(flatten_cells(table, E), opts);
}

}  // namespace pvkit
