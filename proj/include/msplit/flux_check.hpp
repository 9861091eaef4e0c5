#pragma once

#include <cmath>
#include <random>

#include "msplit/stefan_maxwell.hpp"

namespace msplit {

inline constexpr double kFluxRowResidualTol = 1e-11;
inline constexpr double kFluxClosureTol = 1e-13;
inline constexpr double kFluxFickianTol = 1e-12;

// Residuals of the two friction-balance rows under a computed flux triple.
inline std::array<double, 2> stefan_maxwell_row_residuals(const FaceState& fs,
                                                          const DiffusionCoefficients& d,
                                                          const Vec3& n) {
  const Vec3& xi = fs.xi_face;
  const double r1 = (xi[1] * n[0] - xi[0] * n[1]) / d.d12 +
                    (xi[2] * n[0] - xi[0] * n[2]) / d.d13 + fs.grad[0];
  const double r2 = (xi[0] * n[1] - xi[1] * n[0]) / d.d12 +
                    (xi[2] * n[1] - xi[1] * n[2]) / d.d23 + fs.grad[1];
  return {std::abs(r1), std::abs(r2)};
}

struct FluxCheckResult {
  double max_row_residual = 0.0;
  double max_closure_residual = 0.0;
  double max_fickian_deviation = 0.0;

  bool passed() const {
    return max_row_residual < kFluxRowResidualTol && max_closure_residual < kFluxClosureTol &&
           max_fickian_deviation < kFluxFickianTol;
  }
};

// Random composition on the simplex (flat Dirichlet via exponentials).
inline Vec3 random_composition(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(1e-12, 1.0);
  Vec3 xi{-std::log(u(rng)), -std::log(u(rng)), -std::log(u(rng))};
  const double s = xi[0] + xi[1] + xi[2];
  for (double& v : xi) v /= s;
  return xi;
}

// Property sweep over random admissible face states: plug-back residuals of
// the two friction rows, the closure defect, and the analytic equal-D
// Fickian collapse N_i = -D grad(xi_i).
inline FluxCheckResult run_flux_check(int samples, unsigned long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> grad_dist(-2.0, 2.0);
  std::uniform_real_distribution<double> diff_dist(0.05, 1.0);

  FluxCheckResult result;
  for (int s = 0; s < samples; ++s) {
    FaceState fs;
    fs.xi_face = random_composition(rng);
    fs.grad = {grad_dist(rng), grad_dist(rng)};
    const DiffusionCoefficients d(diff_dist(rng), diff_dist(rng), diff_dist(rng));
    const Vec3 n = solve_face_flux(fs, d);
    const auto rr = stefan_maxwell_row_residuals(fs, d, n);
    result.max_row_residual = std::max({result.max_row_residual, rr[0], rr[1]});
    result.max_closure_residual = std::max(result.max_closure_residual, std::abs(n[0] + n[1] + n[2]));

    const double d_eq = diff_dist(rng);
    const DiffusionCoefficients deq(d_eq, d_eq, d_eq);
    const Vec3 neq = solve_face_flux(fs, deq);
    const double g3 = -(fs.grad[0] + fs.grad[1]);  // closure gradient
    result.max_fickian_deviation = std::max({result.max_fickian_deviation,
                                             std::abs(neq[0] + d_eq * fs.grad[0]),
                                             std::abs(neq[1] + d_eq * fs.grad[1]),
                                             std::abs(neq[2] + d_eq * g3)});
  }
  return result;
}

}  // namespace msplit
