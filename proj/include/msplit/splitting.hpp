#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "msplit/core.hpp"
#include "msplit/operators.hpp"
#include "msplit/scenarios.hpp"

namespace msplit {

// Early-stop tolerance for the iterative-splitting sweep differences.
inline constexpr double kIterativeStopTol = 1e-10;

// Iterate end states are determined only to within the stop tolerance, and
// frozen sources legitimately undershoot near-vacuum cells by a comparable
// amount, so their clamp band is the stop tolerance rather than the roundoff
// band used for plain explicit sub-steps. Larger excursions still fail.
inline constexpr double kIterateClampBand = kIterativeStopTol;

// Run-level audit thresholds (enforced by the CLI exit code).
inline constexpr double kClosureAuditTol = 1e-12;
inline constexpr double kSigmaAuditTol = 1e-10;
inline constexpr double kMolesAuditTol = 1e-10;

namespace detail {

// Number of equal sub-steps covering `interval` while respecting max_step.
// A positive quantum overrides the bound: the interval must then be an
// integer multiple of it, so aligned runs share the exact same inner grid.
inline long substep_count(double interval, double max_step, double quantum) {
  if (quantum > 0.0) {
    const double ratio = interval / quantum;
    const long n = std::lround(ratio);
    if (n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-6 * std::max(1.0, ratio))
      throw std::invalid_argument("substep quantum does not divide the interval");
    return n;
  }
  return static_cast<long>(std::ceil(interval / max_step - 1e-9));
}

inline double diffusion_max_step(const ScenarioConfig& cfg) {
  return 0.9 * cfg.grid.dx() * cfg.grid.dx() / (2.0 * cfg.diff.max());
}

inline SpeciesState lerp_state(const SpeciesState& a, const SpeciesState& b, double w) {
  SpeciesState out = a;
  for (int i = 0; i < kNumSpecies; ++i)
    for (size_t j = 0; j < out.xi[i].size(); ++j)
      out.xi[i][j] = (1.0 - w) * a.xi[i][j] + w * b.xi[i][j];
  return out;
}

inline double linf_difference(const SpeciesState& a, const SpeciesState& b) {
  double worst = 0.0;
  for (int i = 0; i < kNumSpecies; ++i)
    for (size_t j = 0; j < a.xi[i].size(); ++j)
      worst = std::max(worst, std::abs(a.xi[i][j] - b.xi[i][j]));
  return worst;
}

}  // namespace detail

// Diffusion over [t, t+dt], sub-cycled to keep each explicit step stable.
inline SpeciesState advance_diffusion(const SpeciesState& state, const ScenarioConfig& cfg,
                                      double dt, SubstepReport* report = nullptr) {
  const long n = detail::substep_count(dt, detail::diffusion_max_step(cfg), cfg.substep_quantum);
  const double h = dt / static_cast<double>(n);
  SpeciesState s = state;
  for (long k = 0; k < n; ++k) s = diffusion_step(s, cfg.diff, cfg.grid, h, report);
  return s;
}

// Convection over [t, t+dt], sub-cycled to CFL <= 1.
inline SpeciesState advance_convection(const SpeciesState& state, const ScenarioConfig& cfg,
                                       double dt, SubstepReport* report = nullptr) {
  if (cfg.velocity == 0.0) return state;
  const double cfl_step = cfg.grid.dx() / std::abs(cfg.velocity);
  const long n = detail::substep_count(dt, cfl_step, cfg.substep_quantum);
  const double h = dt / static_cast<double>(n);
  SpeciesState s = state;
  for (long k = 0; k < n; ++k) s = convection_step(s, cfg.velocity, cfg.grid, h, report);
  return s;
}

// First-order Lie composition, diffusion -> reaction -> convection, each
// sub-operator chained from the previous one's end state over the full dt.
inline SpeciesState lie_step(const SpeciesState& state, const ScenarioConfig& cfg, double dt,
                             SubstepReport* report = nullptr) {
  SpeciesState s = advance_diffusion(state, cfg, dt, report);
  s = reaction_step(s, cfg.reactions, dt, report);
  s = advance_convection(s, cfg, dt, report);
  if (report) report->dt_used = dt;
  return s;
}

// Second-order symmetric composition around the convection core:
// D(dt/2) R(dt/2) C(dt) R(dt/2) D(dt/2).
inline SpeciesState strang_step(const SpeciesState& state, const ScenarioConfig& cfg, double dt,
                                SubstepReport* report = nullptr) {
  SpeciesState s = advance_diffusion(state, cfg, 0.5 * dt, report);
  s = reaction_step(s, cfg.reactions, 0.5 * dt, report);
  s = advance_convection(s, cfg, dt, report);
  s = reaction_step(s, cfg.reactions, 0.5 * dt, report);
  s = advance_diffusion(s, cfg, 0.5 * dt, report);
  if (report) report->dt_used = dt;
  return s;
}

namespace detail {

// Pointwise rate of the non-diffusive operators on one state.
inline std::array<std::vector<double>, kNumSpecies> b_rate_at(const SpeciesState& s,
                                                              const ScenarioConfig& cfg) {
  auto rate = convection_rate(s, cfg.velocity, cfg.grid);
  if (!cfg.reactions.is_zero())
    for (int j = 0; j < cfg.grid.num_cells; ++j) {
      const Vec3 rr = cfg.reactions.rate(s.cell(j));
      for (int i = 0; i < kNumSpecies; ++i) rate[i][j] += rr[i];
    }
  return rate;
}

// A sweep: integrate d_t xi = -div N + B(prev iterate), restarting from the
// step's initial state. The Maxwell-Stefan matrix coefficients come from the
// previous iterate's trajectory (relaxing the nonlinearity); the gradients
// driving the fluxes come from the current unknown. The frozen B source is
// the constant rate b_rate (the previous iterate's mean B rate); on return
// a_displacement holds the pure-diffusion part of the sweep's displacement,
// which the next B sweep consumes as its frozen source integral.
//
// Sweep interiors are Picard iterates, not physical sub-step states: frozen
// sources can transiently push a near-vacuum cell slightly negative before
// diffusion fills it in, so the range clamp applies to the iterate's end
// state only.
inline SpeciesState iterative_sweep_diffusion(
    const SpeciesState& start, const ScenarioConfig& cfg, double dt, const SpeciesState& prev_end,
    const std::array<std::vector<double>, kNumSpecies>* b_rate, SpeciesState& a_displacement,
    SubstepReport* report) {
  const long n = substep_count(dt, diffusion_max_step(cfg), cfg.substep_quantum);
  const double h = dt / static_cast<double>(n);
  const double r = h / cfg.grid.dx();
  SpeciesState cur = start;
  for (long k = 0; k < n; ++k) {
    const double w = (static_cast<double>(k) + 0.5) / static_cast<double>(n);
    const SpeciesState frozen = lerp_state(start, prev_end, w);
    const FluxField flux = compute_flux_field(frozen, cur, cfg.diff, cfg.grid);
    for (int i = 0; i < kNumSpecies; ++i)
      for (int j = 0; j < cfg.grid.num_cells; ++j) {
        cur.xi[i][j] -= r * (flux.n[i][j + 1] - flux.n[i][j]);
        if (b_rate) cur.xi[i][j] += h * (*b_rate)[i][j];
      }
    note_substep(report, 0.0, flux.max_closure_residual());
  }
  const double violation = clamp_to_unit_range(cur, kIterateClampBand);
  if (report) report->max_xi_violation = std::max(report->max_xi_violation, violation);
  for (int i = 0; i < kNumSpecies; ++i)
    for (int j = 0; j < cfg.grid.num_cells; ++j)
      a_displacement.xi[i][j] =
          cur.xi[i][j] - start.xi[i][j] - (b_rate ? dt * (*b_rate)[i][j] : 0.0);
  return cur;
}

// B sweep: integrate d_t xi = v d_x xi + Lambda xi + A(prev iterate) from the
// step's initial state. The frozen diffusion source enters through the A
// sweep's own displacement (its exact integral over the interval), which
// keeps the sweep maps consistent even though diffusion is the stiff part.
// On return b_displacement holds the sweep's own convection+reaction
// displacement, which the next A sweep replays as its frozen source; this
// displacement exchange keeps frozen sources compatible with near-vacuum
// cells (a rate sampled from a later-time state would drain cells the
// restarted trajectory has not filled yet). Only the iterate's end state is
// range-clamped, as in the A sweep.
inline SpeciesState iterative_sweep_reaction_convection(const SpeciesState& start,
                                                        const ScenarioConfig& cfg, double dt,
                                                        const SpeciesState& a_displacement,
                                                        SpeciesState& b_displacement,
                                                        SubstepReport* report) {
  double max_step = dt;
  if (cfg.velocity != 0.0)
    max_step = std::min(max_step, cfg.grid.dx() / std::abs(cfg.velocity));
  const double lambda_norm = norm_inf(cfg.reactions.lambda);
  if (lambda_norm > 0.0) max_step = std::min(max_step, 0.5 / lambda_norm);
  const long n = substep_count(dt, max_step, cfg.substep_quantum);
  const double h = dt / static_cast<double>(n);
  const double a_weight = h / dt;  // source integral split evenly over sub-steps
  SpeciesState cur = start;
  for (long k = 0; k < n; ++k) {
    const auto c_rate = convection_rate(cur, cfg.velocity, cfg.grid);
    for (int j = 0; j < cfg.grid.num_cells; ++j) {
      const Vec3 rr = cfg.reactions.rate(cur.cell(j));
      for (int i = 0; i < kNumSpecies; ++i)
        cur.xi[i][j] += a_weight * a_displacement.xi[i][j] + h * (c_rate[i][j] + rr[i]);
    }
    note_substep(report, 0.0, 0.0);
  }
  const double violation = clamp_to_unit_range(cur, kIterateClampBand);
  if (report) report->max_xi_violation = std::max(report->max_xi_violation, violation);
  for (int i = 0; i < kNumSpecies; ++i)
    for (int j = 0; j < cfg.grid.num_cells; ++j)
      b_displacement.xi[i][j] = cur.xi[i][j] - start.xi[i][j] - a_displacement.xi[i][j];
  return cur;
}

}  // namespace detail

// Iterative splitting: alternating fixed-point sweeps over [t, t+dt],
// starting with the diffusion sweep. Each sweep restarts from the step's
// initial state and sees the previous iterate as frozen data (matrix
// coefficients from its linear-in-time interpolant; source terms from its
// midpoint state or computed displacement). Stops early once consecutive
// iterate end states agree to kIterativeStopTol; running out of sweeps
// first is reported, not fatal. With no convection and no reaction every
// sweep is a diffusion sweep, so m = 1 reproduces a diffusion step with
// coefficients frozen at the initial state.
inline SpeciesState iterative_step(const SpeciesState& state, const ScenarioConfig& cfg, double dt,
                                   int sweeps, SubstepReport* report = nullptr,
                                   std::vector<double>* sweep_deltas = nullptr) {
  if (sweeps < 1) throw std::invalid_argument("iterative_step: need at least one sweep");
  const bool has_b = cfg.velocity != 0.0 || !cfg.reactions.is_zero();

  SpeciesState prev_end = state;
  SpeciesState a_displacement(cfg.grid);
  SpeciesState b_displacement(cfg.grid);
  std::array<std::vector<double>, kNumSpecies> b_rate{};
  if (has_b) b_rate = detail::b_rate_at(state, cfg);  // sources initialized from the start state

  double delta = std::numeric_limits<double>::infinity();
  int used = 0;
  for (int k = 1; k <= sweeps; ++k) {
    const bool diffusion_sweep = !has_b || (k % 2 == 1);
    SpeciesState next(cfg.grid);
    if (diffusion_sweep) {
      if (has_b && k > 1)  // replay the previous B iterate's mean rate
        for (int i = 0; i < kNumSpecies; ++i)
          for (int j = 0; j < cfg.grid.num_cells; ++j)
            b_rate[i][j] = b_displacement.xi[i][j] / dt;
      next = detail::iterative_sweep_diffusion(state, cfg, dt, prev_end,
                                               has_b ? &b_rate : nullptr, a_displacement, report);
    } else {
      next = detail::iterative_sweep_reaction_convection(state, cfg, dt, a_displacement,
                                                         b_displacement, report);
    }
    delta = detail::linf_difference(next, prev_end);
    if (sweep_deltas) sweep_deltas->push_back(delta);
    prev_end = std::move(next);
    used = k;
    if (delta < kIterativeStopTol) break;
  }
  if (report) {
    report->dt_used = dt;
    report->iterations_used = used;
    report->final_iteration_delta = delta;
    report->iteration_converged = delta < kIterativeStopTol;
  }
  return prev_end;
}

inline SpeciesState splitting_step(const SpeciesState& state, const ScenarioConfig& cfg, double dt,
                                   SubstepReport* report = nullptr) {
  switch (cfg.splitting) {
    case SplittingMethod::lie: return lie_step(state, cfg, dt, report);
    case SplittingMethod::strang: return strang_step(state, cfg, dt, report);
    case SplittingMethod::iterative: return iterative_step(state, cfg, dt, cfg.iterations, report);
  }
  throw std::invalid_argument("splitting_step: unknown method");
}

// Maxima over every macro step of a run; the manifest reports these and the
// CLI gates its exit code on the enforced subset.
struct RunAudit {
  double max_closure_residual = 0.0;
  double max_sigma_deviation = 0.0;
  double max_moles_drift = 0.0;
  double max_xi_violation = 0.0;
  SpeciesExtrema extrema;
  Vec3 peak_spread{};
  Vec3 final_spread{};
  Vec3 initial_moles{};

  void observe_state(const SpeciesState& s) {
    max_sigma_deviation = std::max(max_sigma_deviation, msplit::max_sigma_deviation(s));
    const Vec3 m = total_moles(s);
    for (int i = 0; i < kNumSpecies; ++i)
      max_moles_drift = std::max(max_moles_drift, std::abs(m[i] - initial_moles[i]));
    extrema.observe(s);
    const Vec3 spread = spatial_spread(s);
    for (int i = 0; i < kNumSpecies; ++i) peak_spread[i] = std::max(peak_spread[i], spread[i]);
    final_spread = spread;
  }
};

struct RunResult {
  std::vector<SpeciesState> snapshots;
  std::vector<SubstepReport> reports;
  RunAudit audit;
  double dt_used = 0.0;
  long steps = 0;
  double wall_time_seconds = 0.0;

  const SpeciesState& final_state() const { return snapshots.back(); }
};

namespace detail {

inline std::vector<long> snapshot_steps(long n_steps, int count) {
  std::vector<long> steps;
  if (n_steps == 0 || count <= 1) {
    steps.push_back(n_steps);
    return steps;
  }
  for (int k = 0; k < count; ++k) {
    const double target = static_cast<double>(k) / (count - 1) * static_cast<double>(n_steps);
    long idx = static_cast<long>(std::ceil(target - 1e-9));
    idx = std::max(0L, std::min(idx, n_steps));
    if (steps.empty() || idx > steps.back()) steps.push_back(idx);
  }
  return steps;
}

}  // namespace detail

// Advance the configured scenario from t = 0 to t_end with the selected
// driver. Time is tracked as step_index * dt. Deterministic for a given
// config; any sub-step failure is rethrown with time-step context.
inline RunResult run(const ScenarioConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();

  RunResult result;
  SpeciesState state = make_initial_state(cfg.grid, cfg.initial);

  double dt = 0.0;
  long n_steps = 0;
  if (cfg.t_end > 0.0) {
    if (cfg.dt_policy.kind == DtPolicy::Kind::auto_stable) {
      const double dt0 = stable_dt(cfg.diff, cfg.grid.dx(), cfg.velocity, cfg.dt_policy.value);
      n_steps = static_cast<long>(std::ceil(cfg.t_end / dt0 - 1e-9));
      dt = cfg.t_end / static_cast<double>(n_steps);
    } else {
      dt = cfg.dt_policy.value;
      n_steps = static_cast<long>(std::ceil(cfg.t_end / dt - 1e-9));
    }
  }
  result.dt_used = dt;
  result.steps = n_steps;

  result.audit.initial_moles = total_moles(state);
  result.audit.observe_state(state);

  const std::vector<long> snap_at = detail::snapshot_steps(n_steps, cfg.output.snapshot_count);
  size_t snap_idx = 0;
  if (snap_at[0] == 0) {
    result.snapshots.push_back(state);
    ++snap_idx;
  }

  for (long k = 0; k < n_steps; ++k) {
    SubstepReport report;
    SpeciesState next(cfg.grid);
    try {
      next = splitting_step(state, cfg, dt, &report);
    } catch (const std::exception& e) {
      throw step_failure_error("run: step " + std::to_string(k + 1) + " of " +
                               std::to_string(n_steps) + " failed at t = " +
                               std::to_string(static_cast<double>(k) * dt) + ": " + e.what());
    }
    next.time = static_cast<double>(k + 1) * dt;
    state = std::move(next);

    result.audit.observe_state(state);
    result.audit.max_closure_residual =
        std::max(result.audit.max_closure_residual, report.max_closure_residual);
    result.audit.max_xi_violation = std::max(result.audit.max_xi_violation, report.max_xi_violation);
    result.reports.push_back(report);

    if (snap_idx < snap_at.size() && snap_at[snap_idx] == k + 1) {
      result.snapshots.push_back(state);
      ++snap_idx;
    }
  }

  if (result.snapshots.empty() || result.snapshots.back().time != state.time)
    result.snapshots.push_back(state);

  result.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

// Which run-level invariants the exit code enforces, and whether they held.
// Sigma preservation only applies without reactions; moles conservation
// additionally needs zero velocity (upwind transport is not conservative
// under the zero-gradient edge treatment).
struct AuditVerdict {
  bool closure_checked = true;
  bool sigma_checked = false;
  bool moles_checked = false;
  bool passed = true;
  std::string detail;
};

inline AuditVerdict evaluate_audit(const ScenarioConfig& cfg, const RunAudit& audit) {
  AuditVerdict v;
  v.sigma_checked = cfg.reactions.is_zero();
  v.moles_checked = cfg.reactions.is_zero() && cfg.velocity == 0.0;
  auto fail = [&v](const std::string& what) {
    v.passed = false;
    if (!v.detail.empty()) v.detail += "; ";
    v.detail += what;
  };
  if (audit.max_closure_residual >= kClosureAuditTol)
    fail("flux closure residual " + std::to_string(audit.max_closure_residual));
  if (v.sigma_checked && audit.max_sigma_deviation >= kSigmaAuditTol)
    fail("mole-fraction sum drift " + std::to_string(audit.max_sigma_deviation));
  if (v.moles_checked && audit.max_moles_drift >= kMolesAuditTol)
    fail("total-moles drift " + std::to_string(audit.max_moles_drift));
  return v;
}

struct ConvergenceRow {
  double dt = 0.0;
  int species = 0;  // 1-based
  NormKind norm = NormKind::l2;
  double error = 0.0;
  double observed_order = std::numeric_limits<double>::quiet_NaN();
};

// Per-run sub-stepping measures the integrator as-is; aligned sub-stepping
// pins one shared explicit sub-step across the ladder and the reference so
// the inner integration error cancels and the splitting order is isolated.
enum class InnerStepping { per_run, aligned };

// Runs cfg at every ladder entry plus a reference at dt_min/8 and reports
// per-species errors at t_end with pairwise observed orders.
inline std::vector<ConvergenceRow> convergence_study(const ScenarioConfig& cfg,
                                                     const std::vector<double>& dt_ladder,
                                                     InnerStepping stepping = InnerStepping::aligned) {
  if (dt_ladder.empty()) throw std::invalid_argument("convergence_study: empty dt ladder");
  if (!(cfg.t_end > 0.0)) throw std::invalid_argument("convergence_study: t_end must be positive");
  for (size_t i = 0; i < dt_ladder.size(); ++i) {
    if (!(dt_ladder[i] > 0.0)) throw std::invalid_argument("convergence_study: dt must be positive");
    if (i > 0 && !(dt_ladder[i] < dt_ladder[i - 1]))
      throw std::invalid_argument("convergence_study: dt ladder must be strictly decreasing");
    const double ratio = cfg.t_end / dt_ladder[i];
    if (std::abs(ratio - std::round(ratio)) > 1e-6 * ratio)
      throw std::invalid_argument("convergence_study: each dt must divide t_end");
  }

  const double dt_ref = dt_ladder.back() / 8.0;

  double quantum = 0.0;
  if (stepping == InnerStepping::aligned) {
    // Even divisor so Strang's half-intervals stay integral multiples.
    long k = static_cast<long>(std::ceil(dt_ref / detail::diffusion_max_step(cfg) - 1e-9));
    k = std::max(2L, k + (k % 2));
    quantum = dt_ref / static_cast<double>(k);
    for (double dt : dt_ladder) {
      const double ratio = dt / dt_ref;
      if (std::abs(ratio - std::round(ratio)) > 1e-6 * ratio)
        throw std::invalid_argument(
            "convergence_study: aligned stepping needs ladder entries that are integer multiples "
            "of dt_min/8");
    }
  }

  auto run_at = [&](double dt) {
    ScenarioConfig c = cfg;
    c.dt_policy = DtPolicy::fixed(dt);
    c.output.snapshot_count = 1;  // final state only
    c.substep_quantum = quantum;
    return run(c);
  };

  const RunResult reference = run_at(dt_ref);

  std::vector<ConvergenceRow> rows;
  std::array<NormKind, 3> kinds{NormKind::l1, NormKind::l2, NormKind::linf};
  std::vector<std::array<Vec3, 3>> errors(dt_ladder.size());
  for (size_t i = 0; i < dt_ladder.size(); ++i) {
    const RunResult r = run_at(dt_ladder[i]);
    for (size_t n = 0; n < kinds.size(); ++n)
      errors[i][n] = norm(r.final_state(), reference.final_state(), kinds[n]);
    for (size_t n = 0; n < kinds.size(); ++n)
      for (int s = 0; s < kNumSpecies; ++s) {
        ConvergenceRow row;
        row.dt = dt_ladder[i];
        row.species = s + 1;
        row.norm = kinds[n];
        row.error = errors[i][n][s];
        if (i > 0)
          row.observed_order = std::log(errors[i - 1][n][s] / errors[i][n][s]) /
                               std::log(dt_ladder[i - 1] / dt_ladder[i]);
        rows.push_back(row);
      }
  }
  return rows;
}

inline const char* norm_name(NormKind k) {
  switch (k) {
    case NormKind::l1: return "L1";
    case NormKind::l2: return "L2";
    case NormKind::linf: return "Linf";
  }
  return "?";
}

}  // namespace msplit
