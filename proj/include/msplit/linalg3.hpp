#pragma once

#include <algorithm>
#include <array>
#include <cmath>

namespace msplit {

using Vec3 = std::array<double, 3>;

// Row-major 3x3 matrix. Everything here is sized for the three-species
// closure system, so all storage stays on the stack.
struct Mat3 {
  std::array<std::array<double, 3>, 3> a{};

  double& operator()(int i, int j) { return a[i][j]; }
  double operator()(int i, int j) const { return a[i][j]; }

  static Mat3 zero() { return Mat3{}; }

  static Mat3 identity() {
    Mat3 m;
    for (int i = 0; i < 3; ++i) m.a[i][i] = 1.0;
    return m;
  }

  bool operator==(const Mat3&) const = default;
};

inline Vec3 mul(const Mat3& m, const Vec3& v) {
  Vec3 r{};
  for (int i = 0; i < 3; ++i)
    r[i] = m.a[i][0] * v[0] + m.a[i][1] * v[1] + m.a[i][2] * v[2];
  return r;
}

inline Mat3 mul(const Mat3& x, const Mat3& y) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      r.a[i][j] = x.a[i][0] * y.a[0][j] + x.a[i][1] * y.a[1][j] + x.a[i][2] * y.a[2][j];
  return r;
}

inline Mat3 add(const Mat3& x, const Mat3& y) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r.a[i][j] = x.a[i][j] + y.a[i][j];
  return r;
}

inline Mat3 scale(const Mat3& x, double s) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r.a[i][j] = x.a[i][j] * s;
  return r;
}

// max row absolute sum
inline double norm_inf(const Mat3& m) {
  double n = 0.0;
  for (int i = 0; i < 3; ++i) {
    double row = std::abs(m.a[i][0]) + std::abs(m.a[i][1]) + std::abs(m.a[i][2]);
    n = std::max(n, row);
  }
  return n;
}

// LU factorization with row partial pivoting. det is the determinant of the
// original matrix; scale_bound is the product of row 1-norms, an upper bound
// on |det| used as the yardstick for singularity tests.
struct Lu3 {
  Mat3 lu;
  std::array<int, 3> perm{0, 1, 2};
  double det = 0.0;
  double scale_bound = 0.0;
};

inline Lu3 lu_factor(const Mat3& m) {
  Lu3 f;
  f.lu = m;
  f.scale_bound = 1.0;
  for (int i = 0; i < 3; ++i)
    f.scale_bound *= std::abs(m.a[i][0]) + std::abs(m.a[i][1]) + std::abs(m.a[i][2]);

  double sign = 1.0;
  for (int k = 0; k < 3; ++k) {
    int p = k;
    for (int i = k + 1; i < 3; ++i)
      if (std::abs(f.lu.a[i][k]) > std::abs(f.lu.a[p][k])) p = i;
    if (p != k) {
      std::swap(f.lu.a[p], f.lu.a[k]);
      std::swap(f.perm[p], f.perm[k]);
      sign = -sign;
    }
    const double piv = f.lu.a[k][k];
    if (piv == 0.0) {
      f.det = 0.0;
      return f;
    }
    for (int i = k + 1; i < 3; ++i) {
      f.lu.a[i][k] /= piv;
      for (int j = k + 1; j < 3; ++j) f.lu.a[i][j] -= f.lu.a[i][k] * f.lu.a[k][j];
    }
  }
  f.det = sign * f.lu.a[0][0] * f.lu.a[1][1] * f.lu.a[2][2];
  return f;
}

// Requires a nonsingular factorization (check det before calling).
inline Vec3 lu_solve(const Lu3& f, const Vec3& b) {
  Vec3 y;
  for (int i = 0; i < 3; ++i) {
    y[i] = b[f.perm[i]];
    for (int j = 0; j < i; ++j) y[i] -= f.lu.a[i][j] * y[j];
  }
  Vec3 x = y;
  for (int i = 2; i >= 0; --i) {
    for (int j = i + 1; j < 3; ++j) x[i] -= f.lu.a[i][j] * x[j];
    x[i] /= f.lu.a[i][i];
  }
  return x;
}

// Matrix exponential by scaling and squaring around a fixed-degree Taylor
// kernel. With the argument scaled to norm <= 0.5 the degree-17 truncation
// error is ~1e-21, far below the 1e-12 target for the reaction propagator.
inline Mat3 expm(const Mat3& m) {
  const double n = norm_inf(m);
  int s = 0;
  if (n > 0.5) s = static_cast<int>(std::ceil(std::log2(n / 0.5)));
  const Mat3 b = scale(m, std::ldexp(1.0, -s));

  Mat3 p = Mat3::identity();
  for (int k = 17; k >= 1; --k) p = add(Mat3::identity(), scale(mul(b, p), 1.0 / k));

  for (int i = 0; i < s; ++i) p = mul(p, p);
  return p;
}

}  // namespace msplit
