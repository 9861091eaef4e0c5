#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "msplit/core.hpp"

namespace msplit {

enum class Scenario { semi_degenerate_uphill, asymptotic_duncan_toor, plasma_with_reactions };

struct NamedScenario {
  Scenario name;
  ScenarioConfig cfg;
};

// Duncan-Toor style initial data on [0,1]: a plateau-ramp profile for the
// first species, a uniform 0.2 for the second, closure for the third.
inline Vec3 initial_profile(double x) {
  if (!(x >= 0.0 && x <= 1.0))
    throw std::domain_error("initial_profile: x outside [0,1]: " + std::to_string(x));
  double xi1;
  if (x < 0.25)
    xi1 = 0.8;
  else if (x < 0.75)
    xi1 = 1.6 * (0.75 - x);
  else
    xi1 = 0.0;
  const double xi2 = 0.2;
  return {xi1, xi2, 1.0 - (xi1 + xi2)};
}

// Smooth, no-flux compatible profile (zero slope at both ends) on the
// normalized coordinate s in [0,1]; used by the convergence harness where
// the ramp profile's kinks would pollute temporal-order measurements.
inline Vec3 smooth_cosine_profile(double s) {
  const double xi1 = 0.4 + 0.2 * std::cos(std::numbers::pi * s);
  const double xi2 = 0.2 + 0.1 * std::cos(2.0 * std::numbers::pi * s);
  return {xi1, xi2, 1.0 - (xi1 + xi2)};
}

inline SpeciesState make_initial_state(const Grid1D& grid, InitialCondition ic) {
  SpeciesState s(grid, 0.0);
  for (int j = 0; j < grid.num_cells; ++j) {
    const double x = grid.cell_center(j);
    Vec3 v{};
    switch (ic) {
      case InitialCondition::duncan_toor:
        v = initial_profile(x);
        break;
      case InitialCondition::uniform_equilibrium:
        v = {0.4, 0.2, 0.4};
        break;
      case InitialCondition::smooth_cosine:
        v = smooth_cosine_profile((x - grid.domain_lo) / grid.length());
        break;
    }
    s.set_cell(j, v);
  }
  return s;
}

// Exact experiment parameterizations: J=140 cells on [0,1], horizon 1,
// v = 0.01, Lie splitting with the 0.9-safety automatic step.
inline NamedScenario make_scenario(Scenario name, double lambda1 = 0.0, double lambda2 = 0.0) {
  const Grid1D grid(140, 0.0, 1.0);
  switch (name) {
    case Scenario::semi_degenerate_uphill: {
      ScenarioConfig cfg(grid, 1.0, 0.01, DiffusionCoefficients(0.833, 0.833, 0.168));
      return {name, cfg};
    }
    case Scenario::asymptotic_duncan_toor: {
      ScenarioConfig cfg(grid, 1.0, 0.01, DiffusionCoefficients(0.0833, 0.680, 0.168));
      return {name, cfg};
    }
    case Scenario::plasma_with_reactions: {
      ScenarioConfig cfg(grid, 1.0, 0.01, DiffusionCoefficients(0.833, 0.833, 0.168));
      cfg.reactions = ReactionMatrix::from_channel_rates(lambda1, lambda2);
      return {name, cfg};
    }
  }
  throw std::invalid_argument("make_scenario: unknown scenario");
}

inline const char* scenario_cli_name(Scenario s) {
  switch (s) {
    case Scenario::semi_degenerate_uphill: return "semi-degenerate";
    case Scenario::asymptotic_duncan_toor: return "asymptotic";
    case Scenario::plasma_with_reactions: return "plasma";
  }
  return "?";
}

inline std::optional<Scenario> parse_scenario_name(const std::string& name) {
  if (name == "semi-degenerate") return Scenario::semi_degenerate_uphill;
  if (name == "asymptotic") return Scenario::asymptotic_duncan_toor;
  if (name == "plasma") return Scenario::plasma_with_reactions;
  return std::nullopt;
}

inline const char* initial_condition_name(InitialCondition ic) {
  switch (ic) {
    case InitialCondition::duncan_toor: return "duncan-toor";
    case InitialCondition::uniform_equilibrium: return "uniform-equilibrium";
    case InitialCondition::smooth_cosine: return "smooth-cosine";
  }
  return "?";
}

}  // namespace msplit
