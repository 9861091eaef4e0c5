// Test-only oracles, deliberately independent of the library's solution
// paths: Cramer's rule instead of LU, an adaptive embedded Runge-Kutta
// integrator instead of the matrix exponential, a scalar heat-equation
// update instead of the coupled flux solve.
#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "msplit/core.hpp"
#include "msplit/linalg3.hpp"

namespace oracles {

inline double det3(const msplit::Mat3& m) {
  return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
         m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
         m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

inline msplit::Vec3 cramer_solve3(const msplit::Mat3& m, const msplit::Vec3& b) {
  const double d = det3(m);
  if (d == 0.0) throw std::runtime_error("cramer_solve3: singular");
  msplit::Vec3 x{};
  for (int col = 0; col < 3; ++col) {
    msplit::Mat3 mc = m;
    for (int row = 0; row < 3; ++row) mc(row, col) = b[row];
    x[col] = det3(mc) / d;
  }
  return x;
}

// Cash-Karp embedded RK45 with adaptive step control for y' = lambda y.
inline msplit::Vec3 linear_ode_rk45(const msplit::Mat3& lambda, msplit::Vec3 y, double t_total,
                                    double rtol = 1e-13, double atol = 1e-15) {
  if (t_total == 0.0) return y;
  auto f = [&lambda](const msplit::Vec3& v) { return msplit::mul(lambda, v); };
  auto axpy = [](msplit::Vec3 a, double s, const msplit::Vec3& b) {
    for (int i = 0; i < 3; ++i) a[i] += s * b[i];
    return a;
  };

  double t = 0.0;
  double h = t_total / 64.0;
  int guard = 0;
  while (t < t_total) {
    if (++guard > 2000000) throw std::runtime_error("linear_ode_rk45: too many steps");
    if (t + h > t_total) h = t_total - t;

    const msplit::Vec3 k1 = f(y);
    const msplit::Vec3 k2 = f(axpy(y, h / 5.0, k1));
    msplit::Vec3 tmp = axpy(y, 3.0 * h / 40.0, k1);
    const msplit::Vec3 k3 = f(axpy(tmp, 9.0 * h / 40.0, k2));
    tmp = axpy(y, 3.0 * h / 10.0, k1);
    tmp = axpy(tmp, -9.0 * h / 10.0, k2);
    const msplit::Vec3 k4 = f(axpy(tmp, 6.0 * h / 5.0, k3));
    tmp = axpy(y, -11.0 * h / 54.0, k1);
    tmp = axpy(tmp, 5.0 * h / 2.0, k2);
    tmp = axpy(tmp, -70.0 * h / 27.0, k3);
    const msplit::Vec3 k5 = f(axpy(tmp, 35.0 * h / 27.0, k4));
    tmp = axpy(y, 1631.0 * h / 55296.0, k1);
    tmp = axpy(tmp, 175.0 * h / 512.0, k2);
    tmp = axpy(tmp, 575.0 * h / 13824.0, k3);
    tmp = axpy(tmp, 44275.0 * h / 110592.0, k4);
    const msplit::Vec3 k6 = f(axpy(tmp, 253.0 * h / 4096.0, k5));

    msplit::Vec3 y5 = y, y4 = y;
    const double b5[6] = {37.0 / 378.0, 0.0, 250.0 / 621.0, 125.0 / 594.0, 0.0, 512.0 / 1771.0};
    const double b4[6] = {2825.0 / 27648.0, 0.0,           18575.0 / 48384.0,
                          13525.0 / 55296.0, 277.0 / 14336.0, 0.25};
    const msplit::Vec3* ks[6] = {&k1, &k2, &k3, &k4, &k5, &k6};
    for (int s = 0; s < 6; ++s) {
      y5 = axpy(y5, h * b5[s], *ks[s]);
      y4 = axpy(y4, h * b4[s], *ks[s]);
    }

    double err = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double scale = atol + rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
      err = std::max(err, std::abs(y5[i] - y4[i]) / scale);
    }
    if (err <= 1.0) {
      t += h;
      y = y5;
    }
    const double factor = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
    h *= std::min(5.0, std::max(0.2, factor));
  }
  return y;
}

// Explicit Euler step for the scalar heat equation d_t u = D d_xx u with
// no-flux boundaries on a cell-centered grid (the equal-diffusivity limit
// of the coupled system).
inline std::vector<double> scalar_heat_step(const std::vector<double>& u, double d_coef, double dx,
                                            double dt) {
  const int n = static_cast<int>(u.size());
  std::vector<double> out(u.size());
  for (int j = 0; j < n; ++j) {
    const double left = j > 0 ? u[j - 1] - u[j] : 0.0;
    const double right = j < n - 1 ? u[j + 1] - u[j] : 0.0;
    out[j] = u[j] + dt * d_coef * (left + right) / (dx * dx);
  }
  return out;
}

// Random simplex composition bounded away from the edges so a single
// explicit sub-step cannot leave [0,1].
inline msplit::Vec3 interior_composition(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(1e-6, 1.0);
  msplit::Vec3 w{-std::log(u(rng)), -std::log(u(rng)), -std::log(u(rng))};
  const double s = w[0] + w[1] + w[2];
  msplit::Vec3 xi{};
  for (int i = 0; i < 3; ++i) xi[i] = 0.1 + 0.7 * (w[i] / s);
  return xi;
}

inline msplit::SpeciesState random_interior_state(const msplit::Grid1D& grid,
                                                  std::mt19937_64& rng) {
  msplit::SpeciesState s(grid);
  for (int j = 0; j < grid.num_cells; ++j) s.set_cell(j, interior_composition(rng));
  return s;
}

inline bool bitwise_equal(const msplit::SpeciesState& a, const msplit::SpeciesState& b) {
  for (int i = 0; i < msplit::kNumSpecies; ++i)
    for (size_t j = 0; j < a.xi[i].size(); ++j)
      if (a.xi[i][j] != b.xi[i][j]) return false;
  return true;
}

}  // namespace oracles
