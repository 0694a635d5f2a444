#include "pvkit/ebayes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "pvkit/errors.hpp"
#include "pvkit/mathutil.hpp"

namespace pvkit {

double nb_log_marginal(std::int64_t n, double shape, double rate, double e) {
  if (n < 0) throw InvalidArgument("count must be >= 0");
  if (!(shape > 0.0) || !(rate > 0.0))
    throw InvalidArgument("nb marginal needs positive shape and rate");
  if (e < 0.0) throw InvalidArgument("expected baseline must be >= 0");
  if (e == 0.0)
    return n == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  const double dn = static_cast<double>(n);
  return std::lgamma(dn + shape) - std::lgamma(shape) - std::lgamma(dn + 1.0) +
         shape * std::log(rate / (e + rate)) + dn * std::log(e / (e + rate));
}

double nb_marginal(std::int64_t n, double shape, double rate, double e) {
  return std::exp(nb_log_marginal(n, shape, rate, e));
}

std::size_t active_components(const MixturePrior& prior, double tol) {
  std::size_t count = 0;
  if (prior.kind == MixturePrior::Kind::GammaMixture) {
    for (const auto& c : prior.components)
      if (c.weight > tol) ++count;
  } else {
    for (double m : prior.masses)
      if (m > tol) ++count;
  }
  return count;
}

MixturePrior EfronPrior::as_discrete() const {
  MixturePrior prior;
  prior.kind = MixturePrior::Kind::DiscreteGrid;
  prior.support = support;
  prior.masses = masses;
  prior.fit = fit;
  return prior;
}

CellData flatten_cells(const ContingencyTable& table, const BaselineMatrix& E) {
  if (E.expected.rows() != table.n_aes() ||
      E.expected.cols() != table.n_drugs())
    throw InvalidArgument("baseline matrix does not match table shape");
  CellData cells;
  cells.n.reserve(table.n_aes() * table.n_drugs());
  cells.e.reserve(cells.n.capacity());
  for (std::size_t i = 0; i < table.n_aes(); ++i) {
    for (std::size_t j = 0; j < table.n_drugs(); ++j) {
      const double e = E.expected(i, j);
      if (e == 0.0) continue;
      cells.n.push_back(table.count(i, j));
      cells.e.push_back(e);
    }
  }
  return cells;
}

// ---------------------------------------------------------------------------
// Support grid selection
// ---------------------------------------------------------------------------

namespace {

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw InvalidArgument("quantile of empty data");
  if (sorted.size() == 1) return sorted[0];
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

std::vector<double> select_grid(const CellData& cells, std::size_t k) {
  if (k < 10) throw InvalidArgument("grid size must be >= 10");
  if (cells.n.empty()) throw GridFailure("no cells with positive baseline");

  std::vector<double> ratios(cells.n.size());
  for (std::size_t i = 0; i < cells.n.size(); ++i)
    ratios[i] = static_cast<double>(cells.n[i]) / cells.e[i];
  std::sort(ratios.begin(), ratios.end());

  const double lo = std::max(1e-4, ratios.front());
  const double hi =
      std::max(2.0 * quantile_sorted(ratios, 0.999), lo * (1.0 + 1e-6));

  std::vector<double> grid;
  grid.reserve(k + 3);
  for (std::size_t t = 0; t < k; ++t) {
    const double q = static_cast<double>(t) / static_cast<double>(k - 1);
    grid.push_back(std::clamp(quantile_sorted(ratios, q), lo, hi));
  }
  // The span floor stands in for the zero endpoint; 1 is the null value.
  grid.push_back(lo);
  grid.push_back(1.0);
  grid.push_back(hi);
  std::sort(grid.begin(), grid.end());
  std::vector<double> out;
  for (double v : grid) {
    if (out.empty() || v > out.back() * (1.0 + 1e-9)) out.push_back(v);
  }
  return out;
}

std::vector<double> select_grid(const ContingencyTable& table,
                                const BaselineMatrix& E, std::size_t k) {
  return select_grid(flatten_cells(table, E), k);
}

// ---------------------------------------------------------------------------
// KM nonparametric MLE on a fixed grid
// ---------------------------------------------------------------------------

namespace {

// Row-scaled Poisson kernel matrix: scaled(i,k) = exp(logP(i,k) - shift(i)).
struct Kernel {
  Grid<double> scaled;
  std::vector<double> shift;
};

Kernel poisson_kernel(const CellData& cells, std::span<const double> support) {
  const std::size_t n = cells.n.size();
  const std::size_t k = support.size();
  Kernel ker{Grid<double>(n, k, 0.0), std::vector<double>(n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < k; ++t) {
      const double lp = log_poisson_pmf(cells.n[i], support[t] * cells.e[i]);
      ker.scaled(i, t) = lp;
      m = std::max(m, lp);
    }
    ker.shift[i] = m;
    for (std::size_t t = 0; t < k; ++t)
      ker.scaled(i, t) = std::exp(ker.scaled(i, t) - m);
  }
  return ker;
}

}  // namespace

MixturePrior fit_km(const CellData& cells, std::span<const double> support) {
  if (support.empty()) throw InvalidArgument("empty support");
  for (std::size_t t = 0; t + 1 < support.size(); ++t)
    if (!(support[t] < support[t + 1]))
      throw InvalidArgument("support must be strictly increasing");
  if (!(support.front() >= 0.0))
    throw InvalidArgument("support points must be nonnegative");
  if (cells.n.empty()) throw InvalidArgument("no cells to fit");

  const std::size_t n = cells.n.size();
  const std::size_t k = support.size();
  const Kernel ker = poisson_kernel(cells, support);

  std::vector<double> g(k, 1.0 / static_cast<double>(k));
  constexpr double kRelTol = 1e-9;
  constexpr std::size_t kMaxIter = 5000;

  FitInfo info;
  info.method = "km";
  info.tolerance = kRelTol;

  std::vector<double> f(n);
  auto objective = [&] {
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double fi = 0.0;
      for (std::size_t t = 0; t < k; ++t) fi += ker.scaled(i, t) * g[t];
      f[i] = fi;
      ll += std::log(fi) + ker.shift[i];
    }
    return ll;
  };

  double prev = objective();
  info.objective_trace.push_back(prev);
  for (std::size_t iter = 0; iter < kMaxIter; ++iter) {
    info.iterations = iter + 1;
    std::vector<double> gnew(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double inv = 1.0 / f[i];
      for (std::size_t t = 0; t < k; ++t)
        gnew[t] += ker.scaled(i, t) * inv;
    }
    for (std::size_t t = 0; t < k; ++t)
      gnew[t] *= g[t] / static_cast<double>(n);
    // Guard the simplex against accumulated rounding.
    const double total = std::accumulate(gnew.begin(), gnew.end(), 0.0);
    for (double& v : gnew) v /= total;
    g = std::move(gnew);

    const double cur = objective();
    info.objective_trace.push_back(cur);
    const double rel = std::fabs(cur - prev) / (std::fabs(prev) + 1.0);
    prev = cur;
    if (rel < kRelTol) {
      info.converged = true;
      break;
    }
  }
  info.final_objective = prev;

  MixturePrior prior;
  prior.kind = MixturePrior::Kind::DiscreteGrid;
  prior.support.assign(support.begin(), support.end());
  prior.masses = std::move(g);
  prior.fit = std::move(info);
  return prior;
}

MixturePrior fit_km(const ContingencyTable& table, const BaselineMatrix& E,
                    std::span<const double> support) {
  return fit_km(flatten_cells(table, E), support);
}

// ---------------------------------------------------------------------------
// Posterior inference
// ---------------------------------------------------------------------------

namespace {

struct GammaMixturePosterior {
  std::vector<GammaComponent> comps;  // posterior shapes/rates/weights

  double cdf(double x) const {
    if (x <= 0.0) return 0.0;
    double s = 0.0;
    for (const auto& c : comps) {
      if (c.weight < 1e-15) continue;
      s += c.weight * boost::math::gamma_p(c.shape, c.rate * x);
    }
    return s;
  }

  double upper_tail(double x) const {
    if (x <= 0.0) return 1.0;
    double s = 0.0;
    for (const auto& c : comps) {
      if (c.weight < 1e-15) continue;
      s += c.weight * boost::math::gamma_q(c.shape, c.rate * x);
    }
    return s;
  }

  double mean() const {
    double s = 0.0;
    for (const auto& c : comps) s += c.weight * c.shape / c.rate;
    return s;
  }

  double quantile(double q) const {
    double hi = 1.0;
    for (const auto& c : comps) {
      if (c.weight < 1e-15) continue;
      hi = std::max(hi, c.shape / c.rate +
                            12.0 * std::sqrt(c.shape) / c.rate);
    }
    while (cdf(hi) < q) hi *= 2.0;
    double lo = 0.0;
    while (hi - lo > 1e-10 * std::max(1.0, hi)) {
      const double mid = 0.5 * (lo + hi);
      if (cdf(mid) < q)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  }
};

PosteriorSummary summarize_gamma_mixture(std::vector<GammaComponent> comps,
                                         double epsilon, bool prior_only) {
  GammaMixturePosterior post{std::move(comps)};
  PosteriorSummary s;
  s.epsilon = epsilon;
  s.prior_only = prior_only;
  s.mean = post.mean();
  s.median = post.quantile(0.5);
  s.q05 = post.quantile(0.05);
  s.q95 = post.quantile(0.95);
  s.prob_signal = post.upper_tail(1.0 + epsilon);
  s.representation.kind = MixturePrior::Kind::GammaMixture;
  s.representation.components = std::move(post.comps);
  return s;
}

PosteriorSummary summarize_discrete(std::vector<double> support,
                                    std::vector<double> masses, double epsilon,
                                    bool prior_only) {
  PosteriorSummary s;
  s.epsilon = epsilon;
  s.prior_only = prior_only;

  const std::size_t k = support.size();
  double mean = 0.0;
  for (std::size_t t = 0; t < k; ++t) mean += masses[t] * support[t];
  s.mean = mean;

  auto quantile = [&](double q) {
    double cum = 0.0;
    for (std::size_t t = 0; t < k; ++t) {
      cum += masses[t];
      if (cum >= q - 1e-15) return support[t];
    }
    return support[k - 1];
  };
  s.median = quantile(0.5);
  s.q05 = quantile(0.05);
  s.q95 = quantile(0.95);

  double tail = 0.0;
  for (std::size_t t = 0; t < k; ++t)
    if (support[t] > 1.0 + epsilon) tail += masses[t];
  s.prob_signal = tail;

  s.representation.kind = MixturePrior::Kind::DiscreteGrid;
  s.representation.support = std::move(support);
  s.representation.masses = std::move(masses);
  return s;
}

}  // namespace

PosteriorSummary posterior_cell(const MixturePrior& prior, std::int64_t n,
                                double e, double epsilon) {
  if (n < 0) throw InvalidArgument("count must be >= 0");
  if (e < 0.0) throw InvalidArgument("expected baseline must be >= 0");

  if (prior.kind == MixturePrior::Kind::GammaMixture) {
    if (prior.components.empty()) throw InvalidArgument("empty prior");
    const bool prior_only = (e == 0.0);
    std::vector<GammaComponent> post;
    post.reserve(prior.components.size());
    std::vector<double> logw;
    logw.reserve(prior.components.size());
    for (const auto& c : prior.components) {
      GammaComponent pc;
      pc.shape = c.shape + (prior_only ? 0.0 : static_cast<double>(n));
      pc.rate = c.rate + (prior_only ? 0.0 : e);
      pc.weight = 0.0;
      post.push_back(pc);
      if (c.weight <= 0.0) {
        logw.push_back(-std::numeric_limits<double>::infinity());
      } else if (prior_only) {
        logw.push_back(std::log(c.weight));
      } else {
        logw.push_back(std::log(c.weight) +
                       nb_log_marginal(n, c.shape, c.rate, e));
      }
    }
    const double lse = log_sum_exp(logw);
    for (std::size_t t = 0; t < post.size(); ++t)
      post[t].weight = std::exp(logw[t] - lse);
    return summarize_gamma_mixture(std::move(post), epsilon, prior_only);
  }

  // Discrete grid prior.
  if (prior.support.empty() || prior.support.size() != prior.masses.size())
    throw InvalidArgument("malformed discrete prior");
  const bool prior_only = (e == 0.0);
  std::vector<double> logm(prior.support.size());
  for (std::size_t t = 0; t < prior.support.size(); ++t) {
    if (prior.masses[t] <= 0.0) {
      logm[t] = -std::numeric_limits<double>::infinity();
      continue;
    }
    logm[t] = std::log(prior.masses[t]) +
              (prior_only ? 0.0
                          : log_poisson_pmf(n, prior.support[t] * e));
  }
  const double lse = log_sum_exp(logm);
  if (!std::isfinite(lse))
    throw InvalidArgument("posterior has no support mass for this cell");
  std::vector<double> masses(logm.size());
  for (std::size_t t = 0; t < logm.size(); ++t)
    masses[t] = std::exp(logm[t] - lse);
  return summarize_discrete(prior.support, std::move(masses), epsilon,
                            prior_only);
}

PosteriorSummary posterior_cell(const EfronPrior& prior, std::int64_t n,
                                double e, double epsilon) {
  return posterior_cell(prior.as_discrete(), n, e, epsilon);
}

namespace {

template <typename Prior>
EbTableResult eb_signal_table_impl(const Prior& prior,
                                   const ContingencyTable& table,
                                   const BaselineMatrix& E, const EbRule& rule) {
  if (E.expected.rows() != table.n_aes() ||
      E.expected.cols() != table.n_drugs())
    throw InvalidArgument("baseline matrix does not match table shape");
  EbTableResult out{Grid<PosteriorSummary>(table.n_aes(), table.n_drugs()),
                    BoolGrid(table.n_aes(), table.n_drugs(), 0)};
  for (std::size_t i = 0; i < table.n_aes(); ++i) {
    for (std::size_t j = 0; j < table.n_drugs(); ++j) {
      PosteriorSummary s = posterior_cell(prior, table.count(i, j),
                                          E.expected(i, j), rule.epsilon);
      const double v = rule.kind == EbRule::Kind::ProbSignal ? s.prob_signal
                                                             : s.q05;
      out.decisions(i, j) = v > rule.threshold ? 1 : 0;
      out.cells(i, j) = std::move(s);
    }
  }
  return out;
}

}  // namespace

EbTableResult eb_signal_table(const MixturePrior& prior,
                              const ContingencyTable& table,
                              const BaselineMatrix& E, const EbRule& rule) {
  return eb_signal_table_impl(prior, table, E, rule);
}

EbTableResult eb_signal_table(const EfronPrior& prior,
                              const ContingencyTable& table,
                              const BaselineMatrix& E, const EbRule& rule) {
  return eb_signal_table_impl(prior.as_discrete(), table, E, rule);
}

}  // namespace pvkit
