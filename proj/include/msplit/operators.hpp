#pragma once

#include <cmath>

#include "msplit/core.hpp"
#include "msplit/stefan_maxwell.hpp"

namespace msplit {

// Bookkeeping a driver accumulates while composing sub-steps.
struct SubstepReport {
  long steps_taken = 0;
  double dt_used = 0.0;
  double max_xi_violation = 0.0;
  double max_closure_residual = 0.0;
  int iterations_used = 0;
  bool iteration_converged = true;
  double final_iteration_delta = 0.0;
};

namespace detail {

inline void note_substep(SubstepReport* report, double violation, double closure) {
  if (!report) return;
  report->steps_taken += 1;
  report->max_xi_violation = std::max(report->max_xi_violation, violation);
  report->max_closure_residual = std::max(report->max_closure_residual, closure);
}

}  // namespace detail

// Rate of change -div N with the Maxwell-Stefan matrix built from
// coeff_state and gradients from grad_state (see compute_flux_field).
inline std::array<std::vector<double>, kNumSpecies> diffusion_rate(
    const SpeciesState& coeff_state, const SpeciesState& grad_state,
    const DiffusionCoefficients& diff, const Grid1D& grid, double* closure_residual = nullptr) {
  const FluxField flux = compute_flux_field(coeff_state, grad_state, diff, grid);
  if (closure_residual) *closure_residual = flux.max_closure_residual();
  std::array<std::vector<double>, kNumSpecies> rate;
  const double inv_dx = 1.0 / grid.dx();
  for (int i = 0; i < kNumSpecies; ++i) {
    rate[i].resize(static_cast<size_t>(grid.num_cells));
    for (int j = 0; j < grid.num_cells; ++j)
      rate[i][j] = -(flux.n[i][j + 1] - flux.n[i][j]) * inv_dx;
  }
  return rate;
}

// Upwind rate v * dxi/dx for the split convection equation d_t xi = v d_x xi
// (the paper's sign: v > 0 transports profiles leftward). Domain-edge cells
// use zero-gradient extrapolation.
inline std::array<std::vector<double>, kNumSpecies> convection_rate(const SpeciesState& state,
                                                                    double velocity,
                                                                    const Grid1D& grid) {
  std::array<std::vector<double>, kNumSpecies> rate;
  const int nc = grid.num_cells;
  const double inv_dx = 1.0 / grid.dx();
  for (int i = 0; i < kNumSpecies; ++i) {
    rate[i].assign(static_cast<size_t>(nc), 0.0);
    if (velocity == 0.0) continue;
    const auto& f = state.xi[i];
    if (velocity > 0.0) {
      for (int j = 0; j < nc - 1; ++j) rate[i][j] = velocity * (f[j + 1] - f[j]) * inv_dx;
      // rightmost cell: zero gradient
    } else {
      for (int j = 1; j < nc; ++j) rate[i][j] = velocity * (f[j] - f[j - 1]) * inv_dx;
    }
  }
  return rate;
}

// One explicit-Euler finite-volume diffusion step. Caller is responsible
// for keeping dt below the explicit bound (drivers sub-cycle).
// Conserves the dx-weighted cell sum per species exactly up to roundoff.
inline SpeciesState diffusion_step(const SpeciesState& state, const DiffusionCoefficients& diff,
                                   const Grid1D& grid, double dt, SubstepReport* report = nullptr) {
  const FluxField flux = compute_flux_field(state, state, diff, grid);
  SpeciesState next = state;
  const double r = dt / grid.dx();
  for (int i = 0; i < kNumSpecies; ++i)
    for (int j = 0; j < grid.num_cells; ++j)
      next.xi[i][j] -= r * (flux.n[i][j + 1] - flux.n[i][j]);
  const double violation = clamp_to_unit_range(next);
  detail::note_substep(report, violation, flux.max_closure_residual());
  return next;
}

// Exact solve of the linear reaction ODE over dt via the matrix
// exponential; one propagator serves every cell. No range clamping here:
// the linear source model may legitimately leave [0,1] for large rates.
inline SpeciesState reaction_step(const SpeciesState& state, const ReactionMatrix& reactions,
                                  double dt, SubstepReport* report = nullptr) {
  SpeciesState next = state;
  if (!reactions.is_zero()) {
    const Mat3 propagator = expm(scale(reactions.lambda, dt));
    for (int j = 0; j < state.grid.num_cells; ++j) next.set_cell(j, mul(propagator, state.cell(j)));
  }
  detail::note_substep(report, 0.0, 0.0);
  return next;
}

// One first-order upwind convection step; requires CFL = |v| dt / dx <= 1.
inline SpeciesState convection_step(const SpeciesState& state, double velocity, const Grid1D& grid,
                                    double dt, SubstepReport* report = nullptr) {
  if (!(state.grid == grid)) throw std::invalid_argument("convection_step: state/grid mismatch");
  const double courant = std::abs(velocity) * dt / grid.dx();
  if (courant > 1.0 + 1e-12)
    throw std::invalid_argument("convection_step: CFL violation, |v| dt / dx = " +
                                std::to_string(courant));
  SpeciesState next = state;
  if (velocity != 0.0) {
    const auto rate = convection_rate(state, velocity, grid);
    for (int i = 0; i < kNumSpecies; ++i)
      for (int j = 0; j < grid.num_cells; ++j) next.xi[i][j] += dt * rate[i][j];
  }
  const double violation = clamp_to_unit_range(next);
  detail::note_substep(report, violation, 0.0);
  return next;
}

}  // namespace msplit
