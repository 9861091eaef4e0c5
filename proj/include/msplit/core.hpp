#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "msplit/linalg3.hpp"

namespace msplit {

inline constexpr int kNumSpecies = 3;

// Mole fractions may leave [0,1] by at most this much after an explicit
// sub-step; smaller excursions are clamped, larger ones abort the step.
inline constexpr double kXiClipBand = 1e-12;

// A sub-step pushed a mole fraction outside the clip band, or a run-level
// invariant broke. Carries cell/species context in the message.
class step_failure_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The per-face Maxwell-Stefan system was numerically singular
// (degenerate composition). face() is -1 when no face context exists.
class singular_system_error : public std::runtime_error {
 public:
  explicit singular_system_error(const std::string& what, int face = -1)
      : std::runtime_error(what), face_(face) {}
  int face() const noexcept { return face_; }

 private:
  int face_;
};

// Uniform cell-centered 1D finite-volume grid. Faces sit at
// domain_lo + i*dx, i = 0..num_cells; cell j is centered between
// faces j and j+1.
struct Grid1D {
  int num_cells;
  double domain_lo;
  double domain_hi;

  Grid1D(int cells, double lo, double hi) : num_cells(cells), domain_lo(lo), domain_hi(hi) {
    if (cells < 1) throw std::invalid_argument("Grid1D: num_cells must be positive");
    if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi))
      throw std::invalid_argument("Grid1D: domain_hi must exceed domain_lo");
  }

  double dx() const { return (domain_hi - domain_lo) / num_cells; }
  double length() const { return domain_hi - domain_lo; }
  int num_faces() const { return num_cells + 1; }
  double cell_center(int j) const { return domain_lo + (j + 0.5) * dx(); }
  double face_position(int i) const { return domain_lo + i * dx(); }

  bool operator==(const Grid1D&) const = default;
};

// Mole-fraction fields for the three species at one time level.
struct SpeciesState {
  Grid1D grid;
  std::array<std::vector<double>, kNumSpecies> xi;
  double time = 0.0;

  explicit SpeciesState(const Grid1D& g, double t = 0.0) : grid(g), time(t) {
    for (auto& field : xi) field.assign(static_cast<size_t>(g.num_cells), 0.0);
  }

  static SpeciesState uniform(const Grid1D& g, const Vec3& value, double t = 0.0) {
    SpeciesState s(g, t);
    for (int i = 0; i < kNumSpecies; ++i)
      std::fill(s.xi[i].begin(), s.xi[i].end(), value[i]);
    return s;
  }

  Vec3 cell(int j) const { return {xi[0][j], xi[1][j], xi[2][j]}; }

  void set_cell(int j, const Vec3& v) {
    xi[0][j] = v[0];
    xi[1][j] = v[1];
    xi[2][j] = v[2];
  }
};

// Binary Maxwell-Stefan diffusivities, strictly positive.
struct DiffusionCoefficients {
  double d12;
  double d13;
  double d23;

  DiffusionCoefficients(double d12_, double d13_, double d23_) : d12(d12_), d13(d13_), d23(d23_) {
    for (double d : {d12, d13, d23})
      if (!(d > 0.0) || !std::isfinite(d))
        throw std::invalid_argument("DiffusionCoefficients: diffusivities must be positive and finite");
  }

  double max() const { return std::max({d12, d13, d23}); }
};

// Linear reaction source S = lambda * xi. The two hydrogen channels
// (H2 -> H2+ at rate lambda1, H2 -> 2H at rate lambda2) act on the H2
// column with species order (1,2,3) = (H, H2, H2+).
struct ReactionMatrix {
  Mat3 lambda;
  double lambda1 = 0.0;
  double lambda2 = 0.0;

  static ReactionMatrix zero() { return ReactionMatrix{}; }

  static ReactionMatrix from_channel_rates(double l1, double l2) {
    if (!(l1 >= 0.0) || !(l2 >= 0.0) || !std::isfinite(l1) || !std::isfinite(l2))
      throw std::invalid_argument("ReactionMatrix: channel rates must be nonnegative and finite");
    ReactionMatrix r;
    r.lambda1 = l1;
    r.lambda2 = l2;
    r.lambda(0, 1) = 2.0 * l2;
    r.lambda(1, 1) = -(l1 + l2);
    r.lambda(2, 1) = l1;
    return r;
  }

  static ReactionMatrix from_matrix(const Mat3& m) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (!std::isfinite(m(i, j)))
          throw std::invalid_argument("ReactionMatrix: entries must be finite");
    ReactionMatrix r;
    r.lambda = m;
    return r;
  }

  bool is_zero() const {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (lambda(i, j) != 0.0) return false;
    return true;
  }

  Vec3 rate(const Vec3& xi) const { return mul(lambda, xi); }
};

enum class SplittingMethod { lie, strang, iterative };

enum class InitialCondition { duncan_toor, uniform_equilibrium, smooth_cosine };

struct DtPolicy {
  enum class Kind { auto_stable, fixed };
  Kind kind = Kind::auto_stable;
  double value = 0.9;  // safety factor (auto_stable) or step size (fixed)

  static DtPolicy auto_stable(double safety = 0.9) {
    if (!(safety > 0.0) || !(safety <= 1.0))
      throw std::invalid_argument("DtPolicy: safety must lie in (0, 1]");
    return {Kind::auto_stable, safety};
  }

  static DtPolicy fixed(double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt))
      throw std::invalid_argument("DtPolicy: fixed dt must be positive");
    return {Kind::fixed, dt};
  }
};

struct OutputConfig {
  int snapshot_count = 11;
  std::string directory = "out";
};

struct ScenarioConfig {
  Grid1D grid;
  double t_end = 1.0;
  double velocity = 0.0;
  DiffusionCoefficients diff;
  ReactionMatrix reactions = ReactionMatrix::zero();
  SplittingMethod splitting = SplittingMethod::lie;
  int iterations = 4;  // sweep budget for the iterative driver
  DtPolicy dt_policy = DtPolicy::auto_stable();
  InitialCondition initial = InitialCondition::duncan_toor;
  OutputConfig output;
  // When positive, every explicit sub-step uses exactly this size; intervals
  // must then be integer multiples of it. Used by the convergence harness to
  // keep the inner integration identical across ladder runs.
  double substep_quantum = 0.0;

  ScenarioConfig(const Grid1D& g, double t_end_, double velocity_, const DiffusionCoefficients& d)
      : grid(g), t_end(t_end_), velocity(velocity_), diff(d) {
    validate();
  }

  void validate() const {
    if (!(t_end >= 0.0) || !std::isfinite(t_end))
      throw std::invalid_argument("ScenarioConfig: t_end must be nonnegative");
    if (!std::isfinite(velocity)) throw std::invalid_argument("ScenarioConfig: velocity must be finite");
    if (iterations < 1) throw std::invalid_argument("ScenarioConfig: iterations must be >= 1");
    if (output.snapshot_count < 1)
      throw std::invalid_argument("ScenarioConfig: snapshot_count must be >= 1");
    if (substep_quantum < 0.0)
      throw std::invalid_argument("ScenarioConfig: substep_quantum must be nonnegative");
    if (dt_policy.kind == DtPolicy::Kind::auto_stable) {
      if (!(dt_policy.value > 0.0) || !(dt_policy.value <= 1.0))
        throw std::invalid_argument("ScenarioConfig: auto-stable safety must lie in (0, 1]");
    } else if (!(dt_policy.value > 0.0) || !std::isfinite(dt_policy.value)) {
      throw std::invalid_argument("ScenarioConfig: fixed dt must be positive");
    }
  }
};

// Largest stable explicit step: the diffusive bound dx^2 / (2 max D),
// intersected with the advective bound dx/|v| when v is nonzero.
inline double stable_dt(const DiffusionCoefficients& diff, double dx, double velocity,
                        double safety) {
  if (!(dx > 0.0) || !std::isfinite(dx)) throw std::invalid_argument("stable_dt: dx must be positive");
  if (!(safety > 0.0) || !(safety <= 1.0))
    throw std::invalid_argument("stable_dt: safety must lie in (0, 1]");
  double bound = dx * dx / (2.0 * diff.max());
  if (velocity != 0.0) bound = std::min(bound, dx / std::abs(velocity));
  return safety * bound;
}

enum class NormKind { l1, l2, linf };

// Discrete per-species distance between two states on the same grid.
// L1 and L2 are dx-weighted; Linf is the plain max.
inline Vec3 norm(const SpeciesState& a, const SpeciesState& b, NormKind which) {
  if (!(a.grid == b.grid)) throw std::invalid_argument("norm: grid mismatch");
  if (std::abs(a.time - b.time) > 1e-9 * std::max(1.0, std::abs(a.time)))
    throw std::invalid_argument("norm: time mismatch");
  const double dx = a.grid.dx();
  Vec3 out{};
  for (int i = 0; i < kNumSpecies; ++i) {
    double acc = 0.0;
    for (int j = 0; j < a.grid.num_cells; ++j) {
      const double d = std::abs(a.xi[i][j] - b.xi[i][j]);
      switch (which) {
        case NormKind::l1: acc += d * dx; break;
        case NormKind::l2: acc += d * d * dx; break;
        case NormKind::linf: acc = std::max(acc, d); break;
      }
    }
    out[i] = which == NormKind::l2 ? std::sqrt(acc) : acc;
  }
  return out;
}

inline double max_norm(const SpeciesState& a, const SpeciesState& b, NormKind which) {
  const Vec3 n = norm(a, b, which);
  return std::max({n[0], n[1], n[2]});
}

// Clamp mole fractions that left [0,1] by less than the clip band and
// return the largest excursion seen; anything worse aborts the step.
inline double clamp_to_unit_range(SpeciesState& s, double band = kXiClipBand) {
  double worst = 0.0;
  for (int i = 0; i < kNumSpecies; ++i) {
    for (int j = 0; j < s.grid.num_cells; ++j) {
      double& v = s.xi[i][j];
      const double excess = v < 0.0 ? -v : (v > 1.0 ? v - 1.0 : 0.0);
      if (excess == 0.0) continue;
      if (excess >= band)
        throw step_failure_error("mole fraction left the clip band: xi" + std::to_string(i + 1) +
                                 "[" + std::to_string(j) + "] = " + std::to_string(v) +
                                 " at t = " + std::to_string(s.time));
      v = v < 0.0 ? 0.0 : 1.0;
      worst = std::max(worst, excess);
    }
  }
  return worst;
}

// dx-weighted cell sums, the discrete total "moles" per species.
inline Vec3 total_moles(const SpeciesState& s) {
  const double dx = s.grid.dx();
  Vec3 m{};
  for (int i = 0; i < kNumSpecies; ++i) {
    double acc = 0.0;
    for (double v : s.xi[i]) acc += v;
    m[i] = acc * dx;
  }
  return m;
}

inline double max_sigma_deviation(const SpeciesState& s) {
  double worst = 0.0;
  for (int j = 0; j < s.grid.num_cells; ++j)
    worst = std::max(worst, std::abs(s.xi[0][j] + s.xi[1][j] + s.xi[2][j] - 1.0));
  return worst;
}

struct SpeciesExtrema {
  Vec3 min{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
           std::numeric_limits<double>::infinity()};
  Vec3 max{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity()};

  void observe(const SpeciesState& s) {
    for (int i = 0; i < kNumSpecies; ++i) {
      for (double v : s.xi[i]) {
        min[i] = std::min(min[i], v);
        max[i] = std::max(max[i], v);
      }
    }
  }
};

inline Vec3 spatial_spread(const SpeciesState& s) {
  Vec3 spread{};
  for (int i = 0; i < kNumSpecies; ++i) {
    auto [lo, hi] = std::minmax_element(s.xi[i].begin(), s.xi[i].end());
    spread[i] = *hi - *lo;
  }
  return spread;
}

}  // namespace msplit
