#include "swingcal/commands.hpp"

#include <fstream>
#include <ostream>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "swingcal/errors.hpp"
#include "swingcal/format.hpp"
#include "swingcal/posterior.hpp"
#include "swingcal/score_file.hpp"

namespace swingcal {

namespace {

std::ofstream create(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DomainError(fmt::format("cannot write '{}'", path.string()));
  return out;
}

std::string optional_cell(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string("NA");
}

struct DiagnosticsRow {
  std::string group;
  std::size_t units = 0;
  double target = 0.0;
  ShiftResult shift;
  double sigma2 = 0.0;
  double error_scale = 0.0;
  std::optional<BoundReport> bounds;
  std::optional<ApproximationError> error;
};

void write_diagnostics(std::ostream& out, const std::vector<DiagnosticsRow>& rows) {
  out << "group,units,target,alpha,iterations,residual,sigma2,error_estimate,"
         "lower,phi_min,phi_max,upper,gap,rmse,one_minus_r2\n";
  for (const auto& row : rows) {
    auto bound = [&](double BoundReport::*field) {
      return row.bounds ? format_number((*row.bounds).*field) : std::string("NA");
    };
    out << (row.group.empty() ? "(all)" : row.group) << ',' << row.units << ','
        << format_number(row.target) << ',' << format_number(row.shift.alpha) << ','
        << row.shift.iterations << ',' << format_number(row.shift.residual) << ','
        << format_number(row.sigma2) << ',' << format_number(row.error_scale) << ','
        << bound(&BoundReport::lower) << ',' << bound(&BoundReport::phi_min) << ','
        << bound(&BoundReport::phi_max) << ',' << bound(&BoundReport::upper) << ','
        << bound(&BoundReport::gap) << ','
        << optional_cell(row.error ? std::optional(row.error->rmse) : std::nullopt) << ','
        << optional_cell(row.error ? row.error->one_minus_r2 : std::nullopt) << '\n';
  }
}

}  // namespace

Method parse_method(const std::string& text) {
  if (text == "logit-shift") return Method::LogitShift;
  if (text == "exact-posterior") return Method::ExactPosterior;
  if (text == "both") return Method::Both;
  throw UsageError(
      fmt::format("unknown method '{}'; expected logit-shift, exact-posterior or both", text));
}

void cmd_recalibrate(const RecalibrateConfig& config) {
  if (config.total.has_value() == config.targets.has_value()) {
    throw UsageError("give exactly one of --total or --targets");
  }
  if (!(config.tolerance > 0.0)) throw UsageError("--tolerance must be positive");

  const ScoreTable table = read_score_file(config.input, {config.clamp_epsilon});
  const bool grouped = config.targets.has_value();
  if (grouped && !table.group_column) {
    throw DomainError("--targets needs a 'group' column in the score file");
  }
  const ScoreSet scores = to_score_set(table, grouped);
  const std::map<std::string, double> targets =
      grouped ? read_targets(*config.targets) : std::map<std::string, double>{{kAllUnits, *config.total}};

  const auto members = group_members(scores);
  const auto shifts = recalibrate_groups(scores, targets, {config.tolerance});
  const bool posterior_needed = config.method != Method::LogitShift;

  std::vector<double> recalibrated(scores.size());
  std::vector<double> posterior(scores.size());
  std::vector<DiagnosticsRow> diagnostics;
  for (const auto& [group, indices] : members) {
    const ScoreSet subset = scores.subset(indices);
    const ShiftResult& shift = shifts.at(group);
    for (std::size_t k = 0; k < indices.size(); ++k) recalibrated[indices[k]] = shift.recalibrated[k];

    DiagnosticsRow row;
    row.group = group;
    row.units = indices.size();
    row.target = targets.at(group);
    row.shift = shift;
    row.error_scale = error_estimate(subset);
    row.sigma2 = 1.0 / row.error_scale;

    if (posterior_needed) {
      std::int64_t count = 0;
      try {
        count = checked_count(row.target, indices.size());
      } catch (const TargetError& e) {
        throw TargetError(fmt::format("group '{}': {} (exact posterior needs an integer total)",
                                      group.empty() ? "(all)" : group, e.what()));
      }
      const PosteriorResult post = exact_posterior(subset, count, {config.threads, {}});
      for (std::size_t k = 0; k < indices.size(); ++k) posterior[indices[k]] = post.p_star[k];
      row.bounds = bound_report(subset, count, shift, post);
      row.error = approximation_error(shift.recalibrated, post.p_star);
    }
    diagnostics.push_back(std::move(row));
  }

  std::vector<std::pair<std::string, std::vector<double>>> extra;
  if (config.method != Method::ExactPosterior) extra.emplace_back("recalibrated", recalibrated);
  if (posterior_needed) extra.emplace_back("posterior", posterior);
  auto out = create(config.output);
  write_score_file(out, table, extra);
  auto diag = create(config.diagnostics);
  write_diagnostics(diag, diagnostics);
}

SimReport cmd_simulate(const SimulateConfig& config, std::ostream& out) {
  if (config.n < 2) throw UsageError("--n must be at least 2");
  const SimReport report = run_table(config.n, config.seed, {config.threads, {}});

  std::filesystem::path table_path;
  if (config.table) {
    table_path = *config.table;
  } else {
    table_path = config.output;
    table_path.replace_extension(config.output.extension() == ".txt" ? ".table.txt" : ".txt");
  }
  const std::string table = format_table(report);
  auto json_out = create(config.output);
  json_out << to_json(report).dump(2) << '\n';
  auto table_out = create(table_path);
  table_out << table;
  out << table;
  return report;
}

int cmd_verify(const VerifyOptions& options, std::ostream& out) {
  const auto checks = run_verification(options);
  bool all = true;
  for (const auto& check : checks) {
    all = all && check.passed;
    out << fmt::format("{}  {:<52} worst={:<12.4g} threshold={:.1g}\n",
                       check.passed ? "PASS" : "FAIL", check.name, check.worst, check.threshold);
  }
  out << (all ? "all properties hold\n" : "some properties FAILED\n");
  return all ? kExitOk : kExitNumerical;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Recalibrate binary-outcome scores to observed totals"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = all cores)");

  RecalibrateConfig recal;
  std::string method;
  std::string input, output, diagnostics, targets;
  double total = 0.0, clamp = 0.0;
  auto* recalibrate = app.add_subcommand("recalibrate", "Recalibrate a score file");
  recalibrate->add_option("--input", input, "Score file (header with a 'score' column)")->required();
  auto* total_opt = recalibrate->add_option("--total", total, "Observed total for all units");
  auto* targets_opt =
      recalibrate->add_option("--targets", targets, "Per-group totals file (group,total)");
  total_opt->excludes(targets_opt);
  recalibrate->add_option("--method", method, "logit-shift | exact-posterior | both")->required();
  recalibrate->add_option("--tolerance", recal.tolerance, "Solver tolerance on |h(alpha) - D|")
      ->capture_default_str();
  auto* clamp_opt = recalibrate->add_option(
      "--clamp-epsilon", clamp, "Clamp scores in [0, 1] to [eps, 1 - eps] instead of rejecting");
  recalibrate->add_option("--output", output, "Output score file")->required();
  recalibrate->add_option("--diagnostics", diagnostics, "Per-group diagnostics CSV")->required();

  SimulateConfig sim;
  std::string sim_output, sim_table;
  auto* simulate = app.add_subcommand("simulate", "Run the logit-shift vs posterior simulation table");
  simulate->add_option("--n", sim.n, "Units per simulated setting")->required();
  simulate->add_option("--seed", sim.seed, "Master seed")->required();
  simulate->add_option("--output", sim_output, "JSON report path")->required();
  auto* table_opt = simulate->add_option("--table", sim_table, "Text table path");

  VerifyOptions verify_options;
  auto* verify = app.add_subcommand("verify", "Check the recalibration identities on random instances");
  verify->add_option("--max-n", verify_options.max_n, "Largest instance size (<= 20)")
      ->capture_default_str();
  verify->add_option("--seeds", verify_options.seeds, "Random instances per property")
      ->capture_default_str();
  verify->add_option("--seed", verify_options.seed, "Master seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*recalibrate) {
      recal.input = input;
      if (*total_opt) recal.total = total;
      if (*targets_opt) recal.targets = targets;
      recal.method = parse_method(method);
      if (*clamp_opt) recal.clamp_epsilon = clamp;
      recal.output = output;
      recal.diagnostics = diagnostics;
      recal.threads = threads;
      cmd_recalibrate(recal);
      return kExitOk;
    }
    if (*simulate) {
      sim.output = sim_output;
      if (*table_opt) sim.table = sim_table;
      sim.threads = threads;
      cmd_simulate(sim, out);
      return kExitOk;
    }
    verify_options.threads = threads;
    return cmd_verify(verify_options, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    switch (e.kind()) {
      case ErrorKind::Usage:
        return kExitUsage;
      case ErrorKind::Data:
        return kExitData;
      case ErrorKind::Numerical:
        return kExitNumerical;
    }
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace swingcal
