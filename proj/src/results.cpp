#include "pvkit/results.hpp"

#include <ostream>

#include <json.hpp>

#include "pvkit/errors.hpp"
#include "pvkit/io.hpp"

namespace pvkit {

namespace {

using nlohmann::ordered_json;

ordered_json fit_info_to_json(const FitInfo& info) {
  ordered_json j;
  j["method"] = info.method;
  j["iterations"] = info.iterations;
  j["final_objective"] = info.final_objective;
  j["tolerance"] = info.tolerance;
  j["converged"] = info.converged;
  return j;
}

}  // namespace

void write_disprop_csv(std::ostream& out, const ContingencyTable& table,
                       const Grid<DisproportionalityResult>& results,
                       const BoolGrid& flags, const std::string& method) {
  out << "ae,drug,method,estimate,ci_low,ci_high,defined,flag\n";
  for (std::size_t i = 0; i < results.rows(); ++i) {
    for (std::size_t j = 0; j < results.cols(); ++j) {
      const auto& r = results(i, j);
      out << csv_escape(table.ae_label(i)) << ','
          << csv_escape(table.drug_label(j)) << ',' << method << ',';
      if (r.defined) {
        out << format_double(r.estimate) << ',' << format_double(r.ci_low)
            << ',' << format_double(r.ci_high);
      } else {
        out << ",,";
      }
      out << ',' << (r.defined ? "true" : "false") << ','
          << (flags(i, j) ? "true" : "false") << '\n';
    }
  }
}

void write_ic_csv(std::ostream& out, const ContingencyTable& table,
                  const Grid<IcResult>& results, const BoolGrid& flags) {
  out << "ae,drug,ic_mean,ic_var,ic025,flag\n";
  for (std::size_t i = 0; i < results.rows(); ++i) {
    for (std::size_t j = 0; j < results.cols(); ++j) {
      const auto& r = results(i, j);
      out << csv_escape(table.ae_label(i)) << ','
          << csv_escape(table.drug_label(j)) << ','
          << format_double(r.ic_mean) << ',' << format_double(r.ic_variance)
          << ',' << format_double(r.ic025) << ','
          << (flags(i, j) ? "true" : "false") << '\n';
    }
  }
}

void write_test_results_csv(std::ostream& out, const ContingencyTable& table,
                            const std::vector<ColumnTestResult>& results,
                            const std::string& model) {
  out << "drug,statistic,p_value,decision,argmax_ae,reps,seed,model\n";
  for (const auto& r : results) {
    out << csv_escape(table.drug_label(r.drug_index)) << ','
        << format_double(r.drug.statistic) << ','
        << format_double(r.drug.p_value) << ','
        << (r.drug.decision ? "true" : "false") << ',';
    if (r.drug.argmax_ae) out << csv_escape(table.ae_label(*r.drug.argmax_ae));
    out << ',' << r.drug.replications << ',' << r.drug.seed << ',' << model
        << '\n';
  }
}

void write_posterior_csv(std::ostream& out, const ContingencyTable& table,
                         const BaselineMatrix& E, const EbTableResult& result,
                         const std::string& method) {
  out << "ae,drug,N,E,median,q05,q95,prob_signal,decision,method\n";
  for (std::size_t i = 0; i < result.cells.rows(); ++i) {
    for (std::size_t j = 0; j < result.cells.cols(); ++j) {
      const auto& s = result.cells(i, j);
      out << csv_escape(table.ae_label(i)) << ','
          << csv_escape(table.drug_label(j)) << ',' << table.count(i, j)
          << ',' << format_double(E.expected(i, j)) << ','
          << format_double(s.median) << ',' << format_double(s.q05) << ','
          << format_double(s.q95) << ',' << format_double(s.prob_signal)
          << ',' << (result.decisions(i, j) ? "true" : "false") << ','
          << method << '\n';
    }
  }
}

std::string prior_to_json(const MixturePrior& prior) {
  ordered_json j;
  if (prior.kind == MixturePrior::Kind::GammaMixture) {
    j["kind"] = "gamma-mixture";
    ordered_json comps = ordered_json::array();
    for (const auto& c : prior.components)
      comps.push_back(
          {{"shape", c.shape}, {"rate", c.rate}, {"weight", c.weight}});
    j["components"] = comps;
  } else {
    j["kind"] = "discrete-grid";
    j["support"] = prior.support;
    j["masses"] = prior.masses;
  }
  j["fit"] = fit_info_to_json(prior.fit);
  return j.dump(2) + "\n";
}

MixturePrior prior_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("prior JSON parse error: ") + e.what());
  }
  MixturePrior prior;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "gamma-mixture") {
    prior.kind = MixturePrior::Kind::GammaMixture;
    for (const auto& c : j.at("components"))
      prior.components.push_back({c.at("shape").get<double>(),
                                  c.at("rate").get<double>(),
                                  c.at("weight").get<double>()});
  } else if (kind == "discrete-grid") {
    prior.kind = MixturePrior::Kind::DiscreteGrid;
    prior.support = j.at("support").get<std::vector<double>>();
    prior.masses = j.at("masses").get<std::vector<double>>();
  } else {
    throw ParseError("unknown prior kind: " + kind);
  }
  if (j.contains("fit")) {
    const auto& f = j["fit"];
    prior.fit.method = f.value("method", "");
    prior.fit.iterations = f.value("iterations", std::size_t{0});
    prior.fit.final_objective = f.value("final_objective", 0.0);
    prior.fit.tolerance = f.value("tolerance", 0.0);
    prior.fit.converged = f.value("converged", false);
  }
  return prior;
}

std::string efron_prior_to_json(const EfronPrior& prior) {
  ordered_json j;
  j["kind"] = "efron";
  j["support"] = prior.support;
  j["masses"] = prior.masses;
  j["coefficients"] = prior.coefficients;
  j["spline_df"] = prior.spline_df;
  j["c0"] = prior.penalty;
  j["normalizer"] = prior.normalizer;
  j["fit"] = fit_info_to_json(prior.fit);
  return j.dump(2) + "\n";
}

std::string scenario_to_json(const SimScenario& scenario) {
  ordered_json j;
  j["I"] = scenario.n_aes;
  j["J"] = scenario.n_drugs;
  j["row_marginals"] = scenario.row_marginals;
  j["col_totals"] = scenario.col_totals;
  ordered_json signals = ordered_json::array();
  for (std::size_t i = 0; i < scenario.n_aes; ++i) {
    for (std::size_t jj = 0; jj < scenario.n_drugs; ++jj) {
      const double l = scenario.signal_map(i, jj);
      if (l != 1.0)
        signals.push_back({{"i", i}, {"j", jj}, {"lambda", l}});
    }
  }
  j["signals"] = signals;
  j["p0"] = scenario.zero_inflation;
  j["seed"] = scenario.seed;
  return j.dump(2) + "\n";
}

SimScenario scenario_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("scenario JSON parse error: ") + e.what());
  }
  SimScenario s;
  try {
    s.n_aes = j.at("I").get<std::size_t>();
    s.n_drugs = j.at("J").get<std::size_t>();
    s.row_marginals = j.at("row_marginals").get<std::vector<double>>();
    s.col_totals = j.at("col_totals").get<std::vector<std::int64_t>>();
    s.signal_map = Grid<double>(s.n_aes, s.n_drugs, 1.0);
    if (j.contains("signals")) {
      for (const auto& sig : j["signals"]) {
        const auto i = sig.at("i").get<std::size_t>();
        const auto jj = sig.at("j").get<std::size_t>();
        if (i >= s.n_aes || jj >= s.n_drugs)
          throw ParseError("signal index out of range");
        s.signal_map(i, jj) = sig.at("lambda").get<double>();
      }
    }
    s.zero_inflation = j.value("p0", 0.0);
    s.seed = j.value("seed", std::uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("scenario JSON field error: ") + e.what());
  }
  s.validate();
  return s;
}

SimScenario scenario_from_json_file(const std::string& path) {
  return scenario_from_json(read_text_file(path));
}

std::string heatmap_to_json(const std::string& method,
                            const std::string& measure_name,
                            const std::vector<HeatmapCell>& cells) {
  ordered_json j;
  j["method"] = method;
  j["measure"] = measure_name;
  ordered_json arr = ordered_json::array();
  for (const auto& c : cells) {
    arr.push_back({{"ae", c.ae},
                   {"drug", c.drug},
                   {"n", c.n},
                   {"e", c.e},
                   {"measure", c.measure},
                   {"signal", c.signal}});
  }
  j["cells"] = arr;
  return j.dump(2) + "\n";
}

std::string eyeplot_to_json(const std::string& method,
                            const std::vector<EyeplotCell>& cells) {
  ordered_json j;
  j["method"] = method;
  j["interval"] = "90% equi-tailed";
  ordered_json arr = ordered_json::array();
  for (const auto& c : cells) {
    arr.push_back({{"ae", c.ae},
                   {"drug", c.drug},
                   {"n", c.n},
                   {"e", c.e},
                   {"median", c.median},
                   {"q05", c.q05},
                   {"q95", c.q95}});
  }
  j["cells"] = arr;
  return j.dump(2) + "\n";
}

std::string metric_report_to_json(
    const std::vector<std::pair<std::string, MetricReport>>& per_method) {
  ordered_json j;
  ordered_json methods = ordered_json::object();
  for (const auto& [name, r] : per_method) {
    methods[name] = {{"fdr", r.fdr},
                     {"sensitivity", r.sensitivity},
                     {"type_i_error", r.type_i_error},
                     {"tp", r.tp},
                     {"fp", r.fp},
                     {"fn", r.fn},
                     {"tn", r.tn}};
  }
  j["methods"] = methods;
  return j.dump(2) + "\n";
}

}  // namespace pvkit
