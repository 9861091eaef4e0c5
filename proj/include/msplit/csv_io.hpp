#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include "msplit/core.hpp"
#include "msplit/scenarios.hpp"
#include "msplit/splitting.hpp"

namespace msplit {

inline constexpr const char* kVersionString = "0.1.0";

// 17 significant digits: lossless round-trip for IEEE doubles.
inline std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Shortest representation that round-trips; keeps config echoes readable
// ("0.833" stays "0.833").
inline std::string format_echo(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return format_full(v);
  return std::string(buf, ptr);
}

namespace detail {

inline void write_file_atomically(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace detail

// One CSV per run, header t,x,xi1,xi2,xi3, rows ordered by (t, x).
inline std::filesystem::path write_snapshots_csv(const RunResult& result, const Grid1D& grid,
                                                 const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const std::filesystem::path path = dir / "snapshots.csv";
  std::string body = "t,x,xi1,xi2,xi3\n";
  for (const SpeciesState& snap : result.snapshots) {
    const std::string t = format_full(snap.time);
    for (int j = 0; j < grid.num_cells; ++j) {
      body += t;
      body += ',';
      body += format_full(grid.cell_center(j));
      for (int i = 0; i < kNumSpecies; ++i) {
        body += ',';
        body += format_full(snap.xi[i][j]);
      }
      body += '\n';
    }
  }
  detail::write_file_atomically(path, body);
  return path;
}

inline const char* splitting_name(SplittingMethod m) {
  switch (m) {
    case SplittingMethod::lie: return "lie";
    case SplittingMethod::strang: return "strang";
    case SplittingMethod::iterative: return "iterative";
  }
  return "?";
}

// Fully resolved parameter echo plus the run's invariant audit, written
// atomically at run end.
inline std::filesystem::path write_run_manifest(const ScenarioConfig& cfg,
                                                const std::string& scenario_label,
                                                const RunResult& result,
                                                const AuditVerdict& verdict,
                                                const std::filesystem::path& snapshots_path,
                                                const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const std::filesystem::path path = dir / "manifest.txt";
  std::string m;
  auto line = [&m](const std::string& key, const std::string& value) {
    m += key;
    m += ": ";
    m += value;
    m += '\n';
  };
  line("msplit.version", kVersionString);
  line("scenario", scenario_label);
  line("grid.num_cells", std::to_string(cfg.grid.num_cells));
  line("grid.domain_lo", format_echo(cfg.grid.domain_lo));
  line("grid.domain_hi", format_echo(cfg.grid.domain_hi));
  line("t_end", format_echo(cfg.t_end));
  line("velocity", format_echo(cfg.velocity));
  line("diffusivities.d12", format_echo(cfg.diff.d12));
  line("diffusivities.d13", format_echo(cfg.diff.d13));
  line("diffusivities.d23", format_echo(cfg.diff.d23));
  line("reactions.lambda1", format_echo(cfg.reactions.lambda1));
  line("reactions.lambda2", format_echo(cfg.reactions.lambda2));
  for (int i = 0; i < 3; ++i) {
    std::string row;
    for (int j = 0; j < 3; ++j) {
      if (j) row += ' ';
      row += format_echo(cfg.reactions.lambda(i, j));
    }
    line("reactions.matrix.row" + std::to_string(i + 1), row);
  }
  line("splitting", splitting_name(cfg.splitting));
  if (cfg.splitting == SplittingMethod::iterative)
    line("splitting.iterations", std::to_string(cfg.iterations));
  line("dt.policy", cfg.dt_policy.kind == DtPolicy::Kind::auto_stable ? "auto" : "fixed");
  line(cfg.dt_policy.kind == DtPolicy::Kind::auto_stable ? "dt.safety" : "dt.requested",
       format_echo(cfg.dt_policy.value));
  line("dt.used", format_echo(result.dt_used));
  line("steps", std::to_string(result.steps));
  line("initial_condition", initial_condition_name(cfg.initial));
  if (cfg.substep_quantum > 0.0) line("substep_quantum", format_echo(cfg.substep_quantum));
  line("snapshots.count", std::to_string(result.snapshots.size()));
  line("audit.max_closure_residual", format_echo(result.audit.max_closure_residual));
  line("audit.max_sigma_drift", format_echo(result.audit.max_sigma_deviation));
  line("audit.max_moles_drift", format_echo(result.audit.max_moles_drift));
  line("audit.max_xi_violation", format_echo(result.audit.max_xi_violation));
  for (int i = 0; i < kNumSpecies; ++i) {
    const std::string sp = "xi" + std::to_string(i + 1);
    line("audit." + sp + ".min", format_echo(result.audit.extrema.min[i]));
    line("audit." + sp + ".max", format_echo(result.audit.extrema.max[i]));
    line("audit." + sp + ".peak_spread", format_echo(result.audit.peak_spread[i]));
    line("audit." + sp + ".final_spread", format_echo(result.audit.final_spread[i]));
  }
  std::string enforced = "closure";
  if (verdict.sigma_checked) enforced += ",sigma";
  if (verdict.moles_checked) enforced += ",moles";
  line("audit.enforced", enforced);
  line("audit.passed", verdict.passed ? "true" : "false");
  if (!verdict.passed) line("audit.failure", verdict.detail);
  line("outputs.snapshots", snapshots_path.string());
  line("wall_time_seconds", format_echo(result.wall_time_seconds));
  detail::write_file_atomically(path, m);
  return path;
}

inline std::filesystem::path write_convergence_csv(const std::vector<ConvergenceRow>& rows,
                                                   const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const std::filesystem::path path = dir / "convergence.csv";
  std::string body = "dt,species,norm,error,observed_order\n";
  for (const ConvergenceRow& r : rows) {
    body += format_full(r.dt);
    body += ',';
    body += std::to_string(r.species);
    body += ',';
    body += norm_name(r.norm);
    body += ',';
    body += format_full(r.error);
    body += ',';
    body += std::isnan(r.observed_order) ? "nan" : format_full(r.observed_order);
    body += '\n';
  }
  detail::write_file_atomically(path, body);
  return path;
}

}  // namespace msplit
