#pragma once

#include <cmath>
#include <string>

#include "msplit/core.hpp"
#include "msplit/linalg3.hpp"

namespace msplit {

// |det| below this fraction of the row-norm product counts as singular.
inline constexpr double kSingularRelTol = 1e-14;

// Face-interpolated composition and the driving gradients of the first two
// species (the third is fixed by the closure).
struct FaceState {
  Vec3 xi_face{};
  std::array<double, 2> grad{};
};

// Per-face molar flux triples. Boundary faces stay (0,0,0) under the
// no-flux condition; N1+N2+N3 = 0 holds at every face.
struct FluxField {
  std::array<std::vector<double>, kNumSpecies> n;

  explicit FluxField(int num_faces) {
    for (auto& f : n) f.assign(static_cast<size_t>(num_faces), 0.0);
  }

  int num_faces() const { return static_cast<int>(n[0].size()); }

  double max_closure_residual() const {
    double worst = 0.0;
    for (size_t f = 0; f < n[0].size(); ++f)
      worst = std::max(worst, std::abs(n[0][f] + n[1][f] + n[2][f]));
    return worst;
  }
};

// The 3x3 flux system: two Stefan-Maxwell friction balances plus the
// closure row (1,1,1). See Taylor & Krishna, "Multicomponent Mass
// Transfer", ch. 2 for the pairwise-friction form.
inline Mat3 stefan_maxwell_matrix(const Vec3& xi, const DiffusionCoefficients& d) {
  Mat3 m;
  m(0, 0) = xi[1] / d.d12 + xi[2] / d.d13;
  m(0, 1) = -xi[0] / d.d12;
  m(0, 2) = -xi[0] / d.d13;
  m(1, 0) = -xi[1] / d.d12;
  m(1, 1) = xi[0] / d.d12 + xi[2] / d.d23;
  m(1, 2) = -xi[1] / d.d23;
  m(2, 0) = 1.0;
  m(2, 1) = 1.0;
  m(2, 2) = 1.0;
  return m;
}

// Solve one face for (N1, N2, N3). face_index only labels errors.
inline Vec3 solve_face_flux(const FaceState& fs, const DiffusionCoefficients& diff,
                            int face_index = -1) {
  for (double v : fs.xi_face)
    if (!std::isfinite(v)) throw std::invalid_argument("solve_face_flux: nonfinite composition");
  for (double g : fs.grad)
    if (!std::isfinite(g)) throw std::invalid_argument("solve_face_flux: nonfinite gradient");

  const Mat3 m = stefan_maxwell_matrix(fs.xi_face, diff);
  const Lu3 f = lu_factor(m);
  if (!(std::abs(f.det) > kSingularRelTol * f.scale_bound))
    throw singular_system_error(
        "singular Maxwell-Stefan system at face " + std::to_string(face_index) +
            " (composition " + std::to_string(fs.xi_face[0]) + ", " +
            std::to_string(fs.xi_face[1]) + ", " + std::to_string(fs.xi_face[2]) + ")",
        face_index);
  return lu_solve(f, {-fs.grad[0], -fs.grad[1], 0.0});
}

// Flux field with the matrix composition taken from coeff_state and the
// driving gradients from grad_state. Interior faces use arithmetic-mean
// compositions and central gradients; boundary faces are hard zeros.
// The split lets the iterative driver relax the nonlinear coefficients
// against a previous iterate; plain evaluation passes the same state twice.
inline FluxField compute_flux_field(const SpeciesState& coeff_state, const SpeciesState& grad_state,
                                    const DiffusionCoefficients& diff, const Grid1D& grid) {
  if (!(coeff_state.grid == grid) || !(grad_state.grid == grid))
    throw std::invalid_argument("compute_flux_field: state/grid mismatch");
  FluxField flux(grid.num_faces());
  const double inv_dx = 1.0 / grid.dx();
  for (int face = 1; face < grid.num_cells; ++face) {
    FaceState fs;
    for (int i = 0; i < kNumSpecies; ++i)
      fs.xi_face[i] = 0.5 * (coeff_state.xi[i][face - 1] + coeff_state.xi[i][face]);
    fs.grad[0] = (grad_state.xi[0][face] - grad_state.xi[0][face - 1]) * inv_dx;
    fs.grad[1] = (grad_state.xi[1][face] - grad_state.xi[1][face - 1]) * inv_dx;
    const Vec3 n = solve_face_flux(fs, diff, face);
    for (int i = 0; i < kNumSpecies; ++i) flux.n[i][face] = n[i];
  }
  return flux;
}

inline FluxField compute_flux_field(const SpeciesState& state, const DiffusionCoefficients& diff,
                                    const Grid1D& grid) {
  return compute_flux_field(state, state, diff, grid);
}

}  // namespace msplit
