#pragma once

#include <cstdlib>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "msplit/csv_io.hpp"
#include "msplit/flux_check.hpp"
#include "msplit/scenarios.hpp"
#include "msplit/splitting.hpp"

namespace msplit {

// Bad flags, malformed numbers, unknown scenarios: exit code 2.
class usage_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  static constexpr int exit_code = 2;
};

struct RunCommand {
  std::string scenario_label;
  ScenarioConfig cfg;
};

struct ConvergeCommand {
  std::string scenario_label;
  ScenarioConfig cfg;
  std::vector<double> dt_ladder;
  std::string out_dir;
};

struct FluxCheckCommand {
  int samples = 200;
  unsigned long seed = 20260808UL;
};

struct HelpCommand {
  std::string text;
};

using Command = std::variant<RunCommand, ConvergeCommand, FluxCheckCommand, HelpCommand>;

namespace detail {

inline double parse_double_or_usage(const std::string& text, const std::string& what) {
  try {
    size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw usage_error("malformed number for " + what + ": " + text);
    return v;
  } catch (const usage_error&) {
    throw;
  } catch (const std::exception&) {
    throw usage_error("malformed number for " + what + ": " + text);
  }
}

inline std::vector<double> parse_ladder(const std::string& text) {
  std::vector<double> ladder;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw usage_error("empty entry in --dt-ladder");
    const double dt = parse_double_or_usage(item, "--dt-ladder");
    if (!(dt > 0.0)) throw usage_error("--dt-ladder entries must be positive");
    if (!ladder.empty() && !(dt < ladder.back()))
      throw usage_error("--dt-ladder must be strictly decreasing");
    ladder.push_back(dt);
  }
  if (ladder.empty()) throw usage_error("--dt-ladder needs at least one entry");
  return ladder;
}

inline SplittingMethod parse_splitting(const std::string& name) {
  if (name == "lie") return SplittingMethod::lie;
  if (name == "strang") return SplittingMethod::strang;
  if (name == "iterative") return SplittingMethod::iterative;
  throw usage_error("unknown splitting method: " + name);
}

}  // namespace detail

inline Command parse_args(const std::vector<std::string>& args) {
  CLI::App app{"msplit: 1D three-species Maxwell-Stefan transport with operator splitting"};
  app.require_subcommand(1);

  std::string scenario = "semi-degenerate";
  std::string splitting = "lie";
  int iters = 4;
  std::string dt = "auto";
  double t_end = -1.0;  // negative: keep scenario default
  std::string out_dir = "out";
  int snapshots = 11;
  double lambda1 = 0.0;
  double lambda2 = 0.0;

  CLI::App* run_cmd = app.add_subcommand("run", "integrate a scenario, write snapshots.csv + manifest.txt");
  run_cmd->add_option("--scenario", scenario, "semi-degenerate | asymptotic | plasma");
  run_cmd->add_option("--splitting", splitting, "lie | strang | iterative");
  run_cmd->add_option("--iters", iters, "sweep budget for iterative splitting");
  run_cmd->add_option("--dt", dt, "macro time step, or 'auto' for the stability-bound step");
  run_cmd->add_option("--t-end", t_end, "override the scenario time horizon");
  run_cmd->add_option("--out", out_dir, "output directory");
  run_cmd->add_option("--snapshots", snapshots, "number of stored time levels");
  run_cmd->add_option("--lambda1", lambda1, "ionization channel rate (plasma scenario)");
  run_cmd->add_option("--lambda2", lambda2, "dissociation channel rate (plasma scenario)");

  std::string ladder_text;
  CLI::App* conv_cmd = app.add_subcommand("converge", "measure observed splitting orders on a dt ladder");
  conv_cmd->add_option("--scenario", scenario, "semi-degenerate | asymptotic | plasma");
  conv_cmd->add_option("--splitting", splitting, "lie | strang | iterative");
  conv_cmd->add_option("--iters", iters, "sweep budget for iterative splitting");
  conv_cmd->add_option("--dt-ladder", ladder_text, "comma-separated decreasing macro steps")->required();
  conv_cmd->add_option("--t-end", t_end, "override the scenario time horizon");
  conv_cmd->add_option("--out", out_dir, "output directory");
  conv_cmd->add_option("--lambda1", lambda1, "ionization channel rate (plasma scenario)");
  conv_cmd->add_option("--lambda2", lambda2, "dissociation channel rate (plasma scenario)");

  int samples = 200;
  CLI::App* flux_cmd = app.add_subcommand("flux-check", "run the flux-solver property suite and print residual maxima");
  flux_cmd->add_option("--samples", samples, "number of random face states");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("msplit");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    return HelpCommand{app.help()};
  } catch (const CLI::CallForAllHelp&) {
    return HelpCommand{app.help("", CLI::AppFormatMode::All)};
  } catch (const CLI::ParseError& e) {
    throw usage_error(e.what());
  }

  const auto scen = parse_scenario_name(scenario);
  if (!scen) throw usage_error("unknown scenario: " + scenario);
  if (iters < 1) throw usage_error("--iters must be >= 1");
  if (snapshots < 1) throw usage_error("--snapshots must be >= 1");
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) throw usage_error("channel rates must be >= 0");

  ScenarioConfig cfg = make_scenario(*scen, lambda1, lambda2).cfg;
  cfg.splitting = detail::parse_splitting(splitting);
  cfg.iterations = iters;
  if (t_end >= 0.0) cfg.t_end = t_end;
  cfg.output.directory = out_dir;
  cfg.output.snapshot_count = snapshots;
  if (dt != "auto") {
    const double dt_value = detail::parse_double_or_usage(dt, "--dt");
    if (!(dt_value > 0.0)) throw usage_error("--dt must be positive");
    cfg.dt_policy = DtPolicy::fixed(dt_value);
  }

  if (run_cmd->parsed()) return RunCommand{scenario, cfg};
  if (conv_cmd->parsed())
    return ConvergeCommand{scenario, cfg, detail::parse_ladder(ladder_text), out_dir};
  return FluxCheckCommand{samples};
}

inline int execute(const RunCommand& cmd, std::ostream& out, std::ostream& err) {
  RunResult result;
  try {
    result = run(cmd.cfg);
  } catch (const std::exception& e) {
    err << "msplit run: " << e.what() << "\n";
    return 1;
  }
  const AuditVerdict verdict = evaluate_audit(cmd.cfg, result.audit);
  try {
    const auto csv = write_snapshots_csv(result, cmd.cfg.grid, cmd.cfg.output.directory);
    const auto manifest =
        write_run_manifest(cmd.cfg, cmd.scenario_label, result, verdict, csv, cmd.cfg.output.directory);
    out << "wrote " << csv.string() << " (" << result.snapshots.size() << " time levels, "
        << result.steps << " steps, dt = " << format_echo(result.dt_used) << ")\n";
    out << "wrote " << manifest.string() << "\n";
  } catch (const std::exception& e) {
    err << "msplit run: output failed: " << e.what() << "\n";
    return 1;
  }
  if (!verdict.passed) {
    err << "msplit run: invariant audit failed: " << verdict.detail << "\n";
    return 1;
  }
  return 0;
}

inline int execute(const ConvergeCommand& cmd, std::ostream& out, std::ostream& err) {
  std::vector<ConvergenceRow> rows;
  try {
    rows = convergence_study(cmd.cfg, cmd.dt_ladder);
  } catch (const std::invalid_argument& e) {
    err << "msplit converge: " << e.what() << "\n";
    return usage_error::exit_code;
  } catch (const std::exception& e) {
    err << "msplit converge: " << e.what() << "\n";
    return 1;
  }
  try {
    const auto path = write_convergence_csv(rows, cmd.out_dir);
    out << "dt,species,norm,error,observed_order\n";
    for (const ConvergenceRow& r : rows)
      out << format_echo(r.dt) << ",xi" << r.species << ',' << norm_name(r.norm) << ','
          << format_echo(r.error) << ','
          << (std::isnan(r.observed_order) ? std::string("nan") : format_echo(r.observed_order))
          << "\n";
    out << "wrote " << path.string() << "\n";
  } catch (const std::exception& e) {
    err << "msplit converge: output failed: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

inline int execute(const FluxCheckCommand& cmd, std::ostream& out, std::ostream& err) {
  const FluxCheckResult r = run_flux_check(cmd.samples, cmd.seed);
  out << "flux-check over " << cmd.samples << " random face states (seed " << cmd.seed << ")\n";
  out << "max Stefan-Maxwell row residual:   " << format_echo(r.max_row_residual) << "  (tol "
      << format_echo(kFluxRowResidualTol) << ")\n";
  out << "max closure residual |N1+N2+N3|:   " << format_echo(r.max_closure_residual) << "  (tol "
      << format_echo(kFluxClosureTol) << ")\n";
  out << "max equal-D Fickian deviation:     " << format_echo(r.max_fickian_deviation) << "  (tol "
      << format_echo(kFluxFickianTol) << ")\n";
  if (!r.passed()) {
    err << "msplit flux-check: residual exceeded tolerance\n";
    return 1;
  }
  out << "flux-check passed\n";
  return 0;
}

inline int execute(const Command& cmd, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return std::visit(
      [&](const auto& c) -> int {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, HelpCommand>) {
          out << c.text;
          return 0;
        } else {
          return execute(c, out, err);
        }
      },
      cmd);
}

inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return execute(parse_args(args), out, err);
  } catch (const usage_error& e) {
    err << "msplit: " << e.what() << "\n";
    err << "run 'msplit --help' for usage\n";
    return usage_error::exit_code;
  } catch (const std::exception& e) {
    err << "msplit: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace msplit
