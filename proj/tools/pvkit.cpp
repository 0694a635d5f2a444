// pvkit command-line front end: build contingency tables, run signal
// detection / estimation methods, and score them on simulated scenarios.
// Every command writes a manifest with input/output digests so deterministic
// runs can be reproduced byte-identically.

#include <cstdio>
#include <exception>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pvkit/bcpnn.hpp"
#include "pvkit/disprop.hpp"
#include "pvkit/ebayes.hpp"
#include "pvkit/errors.hpp"
#include "pvkit/io.hpp"
#include "pvkit/lrt.hpp"
#include "pvkit/manifest.hpp"
#include "pvkit/parallel.hpp"
#include "pvkit/results.hpp"
#include "pvkit/simulate.hpp"
#include "pvkit/table.hpp"
#include "pvkit/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;       // malformed input files
constexpr int kExitConstraint = 3;  // constraint violations
constexpr int kExitUsage = 4;       // unknown method / bad flags

using pvkit::BaselineMatrix;
using pvkit::ContingencyTable;
using pvkit::RunManifest;

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

RunManifest base_manifest(const std::string& command) {
  RunManifest m;
  m.command = command;
  m.tool_version = pvkit::kVersion;
  m.timestamp = pvkit::current_utc_timestamp();
  return m;
}

std::string manifest_path_for(const std::string& output,
                              const std::string& explicit_path) {
  if (!explicit_path.empty()) return explicit_path;
  return output + ".manifest.json";
}

// ---------------------------------------------------------------------------
// build
// ---------------------------------------------------------------------------

struct BuildArgs {
  std::string input;
  std::string output;
  std::string manifest;
  std::string format = "auto";
  std::vector<std::string> interest;
  std::string reference_list;
  std::string ae_keywords;
};

int run_build(const BuildArgs& args) {
  RunManifest manifest = base_manifest("build");
  manifest.add_input(args.input);

  std::vector<std::string> warnings;
  std::optional<ContingencyTable> table;

  pvkit::CsvKind kind;
  if (args.format == "report") kind = pvkit::CsvKind::Report;
  else if (args.format == "aggregate") kind = pvkit::CsvKind::Aggregate;
  else if (args.format == "table") kind = pvkit::CsvKind::Table;
  else kind = pvkit::sniff_csv_kind(args.input);

  switch (kind) {
    case pvkit::CsvKind::Report: {
      const auto records = pvkit::read_report_csv_file(args.input);
      if (args.interest.empty())
        throw pvkit::InvalidArgument("--interest is required for report input");
      table = pvkit::build_from_reports(records, args.interest, &warnings);
      break;
    }
    case pvkit::CsvKind::Aggregate: {
      const auto aggs = pvkit::read_aggregate_csv_file(args.input);
      if (args.interest.empty())
        throw pvkit::InvalidArgument(
            "--interest is required for aggregate input");
      std::vector<std::string> reference;
      if (!args.reference_list.empty()) {
        reference = pvkit::read_list_file(args.reference_list);
        manifest.add_input(args.reference_list);
      }
      table = pvkit::build_from_aggregates(aggs, args.interest, reference,
                                           &warnings);
      break;
    }
    case pvkit::CsvKind::Table:
      table = pvkit::read_table_csv_file(args.input);
      break;
  }

  if (!args.ae_keywords.empty()) {
    const auto keywords = pvkit::read_list_file(args.ae_keywords);
    manifest.add_input(args.ae_keywords);
    table = pvkit::filter_aes_by_keywords(*table, keywords);
  }

  print_warnings(warnings);
  pvkit::write_table_csv_file(args.output, *table);
  manifest.add_output(args.output);
  for (const auto& d : args.interest)
    manifest.hyperparameters["interest:" + d] = "1";
  manifest.write(manifest_path_for(args.output, args.manifest));
  return kExitOk;
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

struct AnalyzeArgs {
  std::string table_path;
  std::string output;
  std::string manifest;
  std::string method;
  std::string rule;
  std::string model = "poisson";
  std::size_t reps = 999;
  std::uint64_t seed = 1;
  double epsilon = 1e-3;
  unsigned threads = 0;
  std::size_t grid_size = 120;
  std::size_t gg_components = 100;
  double dirichlet_alpha = 0.5;
  std::string prior_out;
  std::string heatmap_out;
  std::string eyeplot_out;
};

struct ParsedRule {
  enum class Kind { Prob, Q05, Ic025, Estimate, CiLow, PValue } kind;
  double threshold;
};

ParsedRule parse_rule(const std::string& text, ParsedRule fallback) {
  if (text.empty()) return fallback;
  const auto gt = text.find('>');
  const auto lt = text.find('<');
  if (gt == std::string::npos && lt == std::string::npos)
    throw pvkit::InvalidArgument("rule must look like 'prob>0.95' or 'p<0.05'");
  const bool greater = gt != std::string::npos;
  const auto pos = greater ? gt : lt;
  const std::string name = text.substr(0, pos);
  const double threshold = std::stod(text.substr(pos + 1));
  ParsedRule rule{fallback.kind, threshold};
  if (name == "prob") rule.kind = ParsedRule::Kind::Prob;
  else if (name == "eb05" || name == "q05") rule.kind = ParsedRule::Kind::Q05;
  else if (name == "ic025") rule.kind = ParsedRule::Kind::Ic025;
  else if (name == "est" || name == "estimate")
    rule.kind = ParsedRule::Kind::Estimate;
  else if (name == "cilow" || name == "ci_low")
    rule.kind = ParsedRule::Kind::CiLow;
  else if (name == "p" || name == "pvalue")
    rule.kind = ParsedRule::Kind::PValue;
  else throw pvkit::InvalidArgument("unknown rule target: " + name);
  return rule;
}

std::vector<std::size_t> non_reference_columns(const ContingencyTable& table) {
  std::vector<std::size_t> cols;
  for (std::size_t j = 0; j < table.n_drugs(); ++j)
    if (!table.reference_col() || *table.reference_col() != j)
      cols.push_back(j);
  return cols;
}

void emit_eb_outputs(const AnalyzeArgs& args, const ContingencyTable& table,
                     const BaselineMatrix& E, const pvkit::EbTableResult& res,
                     const std::string& measure_name, RunManifest& manifest) {
  std::ostringstream csv;
  pvkit::write_posterior_csv(csv, table, E, res, args.method);
  pvkit::write_text_file(args.output, csv.str());
  manifest.add_output(args.output);

  if (!args.heatmap_out.empty()) {
    std::vector<pvkit::HeatmapCell> cells;
    for (std::size_t i = 0; i < table.n_aes(); ++i) {
      for (std::size_t j = 0; j < table.n_drugs(); ++j) {
        const auto& s = res.cells(i, j);
        const double measure =
            measure_name == "eb05" ? s.q05 : 1.0 - s.prob_signal;
        cells.push_back({table.ae_label(i), table.drug_label(j),
                         table.count(i, j), E.expected(i, j), measure,
                         res.decisions(i, j) != 0});
      }
    }
    pvkit::write_text_file(
        args.heatmap_out,
        pvkit::heatmap_to_json(args.method, measure_name, cells));
    manifest.add_output(args.heatmap_out);
  }

  if (!args.eyeplot_out.empty()) {
    // Pairs whose posterior 5% quantile sits below 1 + epsilon are excluded.
    std::vector<pvkit::EyeplotCell> cells;
    for (std::size_t i = 0; i < table.n_aes(); ++i) {
      for (std::size_t j = 0; j < table.n_drugs(); ++j) {
        const auto& s = res.cells(i, j);
        if (s.q05 < 1.0 + args.epsilon) continue;
        cells.push_back({table.ae_label(i), table.drug_label(j),
                         table.count(i, j), E.expected(i, j), s.median, s.q05,
                         s.q95});
      }
    }
    pvkit::write_text_file(args.eyeplot_out,
                           pvkit::eyeplot_to_json(args.method, cells));
    manifest.add_output(args.eyeplot_out);
  }
}

int run_analyze(const AnalyzeArgs& args) {
  RunManifest manifest = base_manifest("analyze");
  manifest.method = args.method;
  manifest.seed = args.seed;
  manifest.add_input(args.table_path);
  manifest.hyperparameters["reps"] = std::to_string(args.reps);
  manifest.hyperparameters["epsilon"] = pvkit::format_double(args.epsilon);
  if (!args.rule.empty()) manifest.hyperparameters["rule"] = args.rule;
  if (!args.model.empty()) manifest.hyperparameters["model"] = args.model;

  const ContingencyTable table = pvkit::read_table_csv_file(args.table_path);
  const unsigned threads = pvkit::resolve_threads(args.threads);

  const bool needs_baseline = args.method != "prr" && args.method != "ror" &&
                              args.method != "bcpnn";
  if (needs_baseline && !table.reference_col())
    std::cerr << "warning: table has no reference column; expected baselines "
                 "use the available columns only\n";

  if (args.method == "prr" || args.method == "ror") {
    const auto results = args.method == "prr" ? pvkit::prr(table)
                                              : pvkit::ror(table);
    const ParsedRule rule = parse_rule(
        args.rule, {ParsedRule::Kind::CiLow, 1.0});
    pvkit::ThresholdRule tr;
    tr.target = rule.kind == ParsedRule::Kind::Estimate
                    ? pvkit::ThresholdRule::Target::Estimate
                    : pvkit::ThresholdRule::Target::CiLow;
    tr.threshold = rule.threshold;
    const auto flags = pvkit::flag_signals(results, tr);
    std::ostringstream csv;
    pvkit::write_disprop_csv(csv, table, results, flags, args.method);
    pvkit::write_text_file(args.output, csv.str());
    manifest.add_output(args.output);
  } else if (args.method == "bcpnn") {
    const auto results = pvkit::ic(table);
    const ParsedRule rule =
        parse_rule(args.rule, {ParsedRule::Kind::Ic025, 0.0});
    const auto flags = pvkit::bcpnn_signals(results, rule.threshold);
    std::ostringstream csv;
    pvkit::write_ic_csv(csv, table, results, flags);
    pvkit::write_text_file(args.output, csv.str());
    manifest.add_output(args.output);
  } else if (args.method == "lrt" || args.method == "ext-lrt" ||
             args.method == "pseudo-lrt") {
    const ParsedRule rule =
        parse_rule(args.rule, {ParsedRule::Kind::PValue, 0.05});
    pvkit::McOptions opts;
    opts.alpha = rule.threshold;
    opts.threads = threads;
    const auto cols = non_reference_columns(table);

    if (args.method == "ext-lrt") {
      const auto res = pvkit::ext_mlr(table, cols, args.reps, args.seed, true,
                                      opts);
      pvkit::ColumnTestResult wrapped;
      wrapped.drug_index = res.argmax_drug.value_or(cols.front());
      wrapped.drug = res;
      std::ostringstream csv;
      pvkit::write_test_results_csv(csv, table, {wrapped}, "ext-lrt");
      pvkit::write_text_file(args.output, csv.str());
      manifest.add_output(args.output);
    } else if (args.method == "lrt") {
      std::vector<pvkit::ColumnTestResult> results;
      for (std::size_t j : cols)
        results.push_back(pvkit::lrt_column_test(table, j, args.reps,
                                                 args.seed, false, opts));
      std::ostringstream csv;
      pvkit::write_test_results_csv(csv, table, results, "poisson");
      pvkit::write_text_file(args.output, csv.str());
      manifest.add_output(args.output);
    } else {
      const BaselineMatrix E = pvkit::expected_baseline(table);
      const pvkit::CountModel model = args.model == "zip"
                                          ? pvkit::CountModel::Zip
                                          : pvkit::CountModel::Poisson;
      const auto out =
          pvkit::pseudo_lrt(table, E, cols, model, args.reps, args.seed, opts);
      std::ostringstream csv;
      pvkit::write_test_results_csv(csv, table, out.per_drug, args.model);
      pvkit::write_text_file(args.output, csv.str());
      manifest.add_output(args.output);
      if (!args.heatmap_out.empty()) {
        std::vector<pvkit::HeatmapCell> cells;
        for (const auto& r : out.per_drug) {
          for (std::size_t i = 0; i < table.n_aes(); ++i) {
            cells.push_back({table.ae_label(i),
                             table.drug_label(r.drug_index),
                             table.count(i, r.drug_index),
                             E.expected(i, r.drug_index), r.cell_pvalues[i],
                             r.cell_pvalues[i] < opts.alpha});
          }
        }
        pvkit::write_text_file(
            args.heatmap_out,
            pvkit::heatmap_to_json(args.method, "p_value", cells));
        manifest.add_output(args.heatmap_out);
      }
    }
  } else if (args.method == "gps" || args.method == "general-gamma" ||
             args.method == "km" || args.method == "efron") {
    const BaselineMatrix E = pvkit::expected_baseline(table);
    pvkit::EbRule rule;
    rule.epsilon = args.epsilon;
    const ParsedRule parsed = parse_rule(
        args.rule, args.method == "gps"
                       ? ParsedRule{ParsedRule::Kind::Q05, 2.0}
                       : ParsedRule{ParsedRule::Kind::Prob, 0.95});
    rule.kind = parsed.kind == ParsedRule::Kind::Q05
                    ? pvkit::EbRule::Kind::Q05Threshold
                    : pvkit::EbRule::Kind::ProbSignal;
    rule.threshold = parsed.threshold;
    const std::string measure_name =
        rule.kind == pvkit::EbRule::Kind::Q05Threshold ? "eb05"
                                                       : "one_minus_prob";

    pvkit::EbTableResult res;
    std::string prior_json;
    if (args.method == "gps") {
      const auto prior = pvkit::fit_gps(table, E);
      res = pvkit::eb_signal_table(prior, table, E, rule);
      prior_json = pvkit::prior_to_json(prior);
    } else if (args.method == "general-gamma") {
      pvkit::GeneralGammaOptions opts;
      opts.n_components = args.gg_components;
      opts.dirichlet_alpha = args.dirichlet_alpha;
      opts.threads = threads;
      const auto prior = pvkit::fit_general_gamma(table, E, opts);
      res = pvkit::eb_signal_table(prior, table, E, rule);
      prior_json = pvkit::prior_to_json(prior);
    } else if (args.method == "km") {
      const auto support = pvkit::select_grid(table, E, args.grid_size);
      const auto prior = pvkit::fit_km(table, E, support);
      res = pvkit::eb_signal_table(prior, table, E, rule);
      prior_json = pvkit::prior_to_json(prior);
    } else {
      const auto support = pvkit::select_grid(table, E, args.grid_size);
      const auto cells = pvkit::flatten_cells(table, E);
      const auto sel = pvkit::select_efron(cells, support);
      res = pvkit::eb_signal_table(sel.best, table, E, rule);
      prior_json = pvkit::efron_prior_to_json(sel.best);
    }

    emit_eb_outputs(args, table, E, res, measure_name, manifest);
    if (!args.prior_out.empty()) {
      pvkit::write_text_file(args.prior_out, prior_json);
      manifest.add_output(args.prior_out);
    }
  } else {
    std::cerr << "error: unknown method '" << args.method << "'\n";
    return kExitUsage;
  }

  manifest.write(manifest_path_for(args.output, args.manifest));
  return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string scenario_path;
  std::string output;
  std::string manifest;
  std::size_t tables = 1;
  std::vector<std::string> methods;
  std::size_t reps = 499;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string generator = "poisson";  // poisson | conditional
};

int run_simulate(const SimulateArgs& args) {
  if (args.tables == 0) {
    std::cerr << "error: --tables must be >= 1\n";
    return kExitInput;
  }
  RunManifest manifest = base_manifest("simulate");
  manifest.seed = args.seed;
  manifest.add_input(args.scenario_path);
  manifest.hyperparameters["tables"] = std::to_string(args.tables);
  manifest.hyperparameters["reps"] = std::to_string(args.reps);
  manifest.hyperparameters["generator"] = args.generator;

  const pvkit::SimScenario scenario =
      pvkit::scenario_from_json_file(args.scenario_path);
  const unsigned threads = pvkit::resolve_threads(args.threads);
  const auto truth = scenario.truth();

  // LRT-family tests decide per drug (the statistic is a column max), so
  // those methods are scored against per-drug truth: a drug is a true signal
  // when any of its cells is.
  pvkit::BoolGrid drug_truth(1, scenario.n_drugs, 0);
  for (std::size_t j = 0; j < scenario.n_drugs; ++j)
    for (std::size_t i = 0; i < scenario.n_aes; ++i)
      if (truth(i, j)) drug_truth(0, j) = 1;

  std::map<std::string, pvkit::MetricReport> totals;
  for (const auto& m : args.methods) totals[m] = {};

  for (std::size_t t = 0; t < args.tables; ++t) {
    const ContingencyTable table =
        args.generator == "conditional"
            ? pvkit::gen_null_conditional(scenario, t)
            : pvkit::gen_poisson_table(scenario, t);
    const BaselineMatrix E = pvkit::expected_baseline(table);

    for (const auto& method : args.methods) {
      pvkit::BoolGrid decisions(table.n_aes(), table.n_drugs(), 0);
      if (method == "prr" || method == "ror") {
        const auto results =
            method == "prr" ? pvkit::prr(table) : pvkit::ror(table);
        decisions = pvkit::flag_signals(
            results, {pvkit::ThresholdRule::Target::CiLow, 1.0});
      } else if (method == "bcpnn") {
        decisions = pvkit::bcpnn_signals(pvkit::ic(table), 0.0);
      } else if (method == "lrt" || method == "pseudo-lrt" ||
                 method == "pseudo-lrt-zip") {
        pvkit::McOptions opts;
        opts.threads = threads;
        std::vector<std::size_t> cols(table.n_drugs());
        for (std::size_t j = 0; j < cols.size(); ++j) cols[j] = j;
        pvkit::BoolGrid drug_decisions(1, table.n_drugs(), 0);
        if (method == "lrt") {
          for (std::size_t j : cols) {
            const auto r = pvkit::mc_null_pvalue(table, j, args.reps,
                                                 args.seed + t, false, opts);
            drug_decisions(0, j) = r.decision ? 1 : 0;
          }
        } else {
          const auto model = method == "pseudo-lrt-zip"
                                 ? pvkit::CountModel::Zip
                                 : pvkit::CountModel::Poisson;
          const auto out = pvkit::pseudo_lrt(table, E, cols, model, args.reps,
                                             args.seed + t, opts);
          for (const auto& r : out.per_drug)
            drug_decisions(0, r.drug_index) = r.drug.decision ? 1 : 0;
        }
        const auto r = pvkit::score(drug_decisions, drug_truth);
        auto& acc = totals[method];
        acc.tp += r.tp;
        acc.fp += r.fp;
        acc.fn += r.fn;
        acc.tn += r.tn;
        continue;
      } else if (method == "gps" || method == "general-gamma" ||
                 method == "km" || method == "efron") {
        pvkit::EbRule rule;
        if (method == "gps") {
          rule.kind = pvkit::EbRule::Kind::Q05Threshold;
          rule.threshold = 2.0;
        }
        pvkit::EbTableResult res;
        if (method == "gps") {
          res = pvkit::eb_signal_table(pvkit::fit_gps(table, E), table, E,
                                       rule);
        } else if (method == "general-gamma") {
          pvkit::GeneralGammaOptions opts;
          opts.threads = threads;
          res = pvkit::eb_signal_table(pvkit::fit_general_gamma(table, E, opts),
                                       table, E, rule);
        } else if (method == "km") {
          const auto support = pvkit::select_grid(table, E, 120);
          res = pvkit::eb_signal_table(pvkit::fit_km(table, E, support), table,
                                       E, rule);
        } else {
          const auto support = pvkit::select_grid(table, E, 120);
          const auto sel =
              pvkit::select_efron(pvkit::flatten_cells(table, E), support);
          res = pvkit::eb_signal_table(sel.best, table, E, rule);
        }
        decisions = res.decisions;
      } else {
        std::cerr << "error: unknown method '" << method << "'\n";
        return kExitUsage;
      }

      const auto r = pvkit::score(decisions, truth);
      auto& acc = totals[method];
      acc.tp += r.tp;
      acc.fp += r.fp;
      acc.fn += r.fn;
      acc.tn += r.tn;
    }
  }

  std::vector<std::pair<std::string, pvkit::MetricReport>> per_method;
  for (auto& [name, acc] : totals) {
    acc.fdr = static_cast<double>(acc.fp) /
              static_cast<double>(std::max<std::int64_t>(acc.tp + acc.fp, 1));
    acc.sensitivity =
        static_cast<double>(acc.tp) /
        static_cast<double>(std::max<std::int64_t>(acc.tp + acc.fn, 1));
    acc.type_i_error =
        static_cast<double>(acc.fp) /
        static_cast<double>(std::max<std::int64_t>(acc.fp + acc.tn, 1));
    per_method.emplace_back(name, acc);
  }

  pvkit::write_text_file(args.output, pvkit::metric_report_to_json(per_method));
  manifest.add_output(args.output);
  manifest.write(manifest_path_for(args.output, args.manifest));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pvkit: contingency-table signal detection toolkit"};
  app.set_version_flag("--version", pvkit::kVersion);
  app.require_subcommand(1);

  BuildArgs build_args;
  auto* build = app.add_subcommand(
      "build", "Build a contingency table from report or aggregate CSV");
  build->add_option("--input", build_args.input, "Input CSV")->required();
  build->add_option("--output", build_args.output, "Output table CSV")
      ->required();
  build->add_option("--manifest", build_args.manifest,
                    "Manifest path (default <output>.manifest.json)");
  build->add_option("--format", build_args.format,
                    "Input format: auto|report|aggregate|table");
  build->add_option("--interest", build_args.interest,
                    "Drugs of interest (repeatable)");
  build->add_option("--reference-list", build_args.reference_list,
                    "File with one reference drug per line");
  build->add_option("--ae-keywords", build_args.ae_keywords,
                    "File with one AE keyword per line");

  AnalyzeArgs analyze_args;
  auto* analyze = app.add_subcommand("analyze", "Run a method on a table");
  analyze->add_option("--table", analyze_args.table_path, "Table CSV")
      ->required();
  analyze->add_option("--output", analyze_args.output, "Results CSV")
      ->required();
  analyze->add_option("--manifest", analyze_args.manifest, "Manifest path");
  analyze
      ->add_option("--method", analyze_args.method,
                   "prr|ror|bcpnn|lrt|ext-lrt|pseudo-lrt|gps|general-gamma|"
                   "km|efron")
      ->required();
  analyze->add_option("--rule", analyze_args.rule,
                      "Decision rule, e.g. prob>0.95, eb05>2, p<0.05");
  analyze->add_option("--model", analyze_args.model,
                      "pseudo-lrt count model: poisson|zip");
  analyze->add_option("--reps", analyze_args.reps, "Monte Carlo replicates");
  analyze->add_option("--seed", analyze_args.seed, "RNG seed");
  analyze->add_option("--epsilon", analyze_args.epsilon,
                      "Signal margin for P(lambda > 1+eps)");
  analyze->add_option("--threads", analyze_args.threads,
                      "Worker threads (0 = PVKIT_THREADS or 1)");
  analyze->add_option("--grid-size", analyze_args.grid_size,
                      "Support grid size for km/efron");
  analyze->add_option("--components", analyze_args.gg_components,
                      "Mixture size K for general-gamma");
  analyze->add_option("--dirichlet-alpha", analyze_args.dirichlet_alpha,
                      "Dirichlet sparsity parameter in (0,1)");
  analyze->add_option("--prior-out", analyze_args.prior_out,
                      "Write the fitted prior JSON here");
  analyze->add_option("--heatmap-out", analyze_args.heatmap_out,
                      "Write heatmap-cell JSON here");
  analyze->add_option("--eyeplot-out", analyze_args.eyeplot_out,
                      "Write eyeplot JSON here");

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand(
      "simulate", "Generate scenario tables and score methods");
  simulate->add_option("--scenario", sim_args.scenario_path, "Scenario JSON")
      ->required();
  simulate->add_option("--output", sim_args.output, "Metric report JSON")
      ->required();
  simulate->add_option("--manifest", sim_args.manifest, "Manifest path");
  simulate->add_option("--tables", sim_args.tables, "Number of tables");
  simulate->add_option("--methods", sim_args.methods,
                       "Methods to score (repeatable)")
      ->required();
  simulate->add_option("--reps", sim_args.reps, "Monte Carlo replicates");
  simulate->add_option("--seed", sim_args.seed, "RNG seed for the tests");
  simulate->add_option("--threads", sim_args.threads, "Worker threads");
  simulate->add_option("--generator", sim_args.generator,
                       "Table generator: poisson|conditional");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (build->parsed()) return run_build(build_args);
    if (analyze->parsed()) return run_analyze(analyze_args);
    if (simulate->parsed()) return run_simulate(sim_args);
  } catch (const pvkit::DisjointnessViolation& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConstraint;
  } catch (const pvkit::NoMatchingRows& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConstraint;
  } catch (const pvkit::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const pvkit::EmptyInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const pvkit::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const pvkit::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitUsage;
}
