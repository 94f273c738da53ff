#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "ctgca/errors.hpp"

namespace ctgca {

// Plain 4x4 double matrix, row major. Used for voxel-to-world affines and
// world-to-world transforms; the bottom row is expected to be (0,0,0,1) but is
// stored and multiplied like any other row so round trips stay exact.
struct Mat4 {
  std::array<double, 16> m{};

  static Mat4 identity() {
    Mat4 r;
    r.m = {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1};
    return r;
  }

  double& operator()(int r, int c) { return m[static_cast<size_t>(r) * 4 + c]; }
  double operator()(int r, int c) const { return m[static_cast<size_t>(r) * 4 + c]; }

  Mat4 operator*(const Mat4& o) const {
    Mat4 r;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        double s = 0;
        for (int k = 0; k < 4; ++k) s += (*this)(i, k) * o(k, j);
        r(i, j) = s;
      }
    return r;
  }

  // Applies the affine part to a point (assumes last row 0,0,0,1).
  std::array<double, 3> apply_point(double x, double y, double z) const {
    return {m[0] * x + m[1] * y + m[2] * z + m[3],
            m[4] * x + m[5] * y + m[6] * z + m[7],
            m[8] * x + m[9] * y + m[10] * z + m[11]};
  }

  // Determinant of the upper-left 3x3 block.
  double det3() const {
    return m[0] * (m[5] * m[10] - m[6] * m[9]) -
           m[1] * (m[4] * m[10] - m[6] * m[8]) +
           m[2] * (m[4] * m[9] - m[5] * m[8]);
  }

  // Euclidean norms of the three columns of the upper-left 3x3 block.
  std::array<double, 3> column_norms3() const {
    std::array<double, 3> n{};
    for (int c = 0; c < 3; ++c)
      n[c] = std::sqrt(m[c] * m[c] + m[4 + c] * m[4 + c] + m[8 + c] * m[8 + c]);
    return n;
  }

  // Gauss-Jordan inverse with partial pivoting. Throws NumericError when the
  // matrix is singular (pivot below 1e-12 after scaling).
  Mat4 inverse() const {
    double a[4][8];
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        a[i][j] = (*this)(i, j);
        a[i][j + 4] = (i == j) ? 1.0 : 0.0;
      }
    }
    for (int col = 0; col < 4; ++col) {
      int piv = col;
      for (int r = col + 1; r < 4; ++r)
        if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
      if (std::fabs(a[piv][col]) < 1e-12)
        throw NumericError("Mat4::inverse: singular matrix");
      if (piv != col)
        for (int j = 0; j < 8; ++j) std::swap(a[piv][j], a[col][j]);
      const double inv = 1.0 / a[col][col];
      for (int j = 0; j < 8; ++j) a[col][j] *= inv;
      for (int r = 0; r < 4; ++r) {
        if (r == col) continue;
        const double f = a[r][col];
        if (f == 0.0) continue;
        for (int j = 0; j < 8; ++j) a[r][j] -= f * a[col][j];
      }
    }
    Mat4 out;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) out(i, j) = a[i][j + 4];
    return out;
  }
};

// 12-parameter affine: [tx ty tz | rx ry rz | log_sx log_sy log_sz | hxy hxz hyz].
// Translations in mm, rotations in radians (intrinsic Z-Y-X order), scales as
// natural logs so 0 means unit scale, shears dimensionless.
using AffineParams = std::array<double, 12>;

inline Mat4 rotation_zyx(double rx, double ry, double rz) {
  const double cx = std::cos(rx), sx = std::sin(rx);
  const double cy = std::cos(ry), sy = std::sin(ry);
  const double cz = std::cos(rz), sz = std::sin(rz);
  Mat4 r = Mat4::identity();
  // R = Rz * Ry * Rx
  r(0, 0) = cz * cy;
  r(0, 1) = cz * sy * sx - sz * cx;
  r(0, 2) = cz * sy * cx + sz * sx;
  r(1, 0) = sz * cy;
  r(1, 1) = sz * sy * sx + cz * cx;
  r(1, 2) = sz * sy * cx - cz * sx;
  r(2, 0) = -sy;
  r(2, 1) = cy * sx;
  r(2, 2) = cy * cx;
  return r;
}

// matrix = T * R * H * S with H upper triangular and S = diag(exp(log_s)).
inline Mat4 compose_affine(const AffineParams& p) {
  Mat4 t = Mat4::identity();
  t(0, 3) = p[0];
  t(1, 3) = p[1];
  t(2, 3) = p[2];
  const Mat4 r = rotation_zyx(p[3], p[4], p[5]);
  Mat4 h = Mat4::identity();
  h(0, 1) = p[9];
  h(0, 2) = p[10];
  h(1, 2) = p[11];
  Mat4 s = Mat4::identity();
  s(0, 0) = std::exp(p[6]);
  s(1, 1) = std::exp(p[7]);
  s(2, 2) = std::exp(p[8]);
  return t * (r * (h * s));
}

// Rotation angle in radians of a (near-)rotation 3x3 block; used by tests to
// measure residual rotation after registration.
inline double rotation_angle(const Mat4& m) {
  double tr = m(0, 0) + m(1, 1) + m(2, 2);
  double c = (tr - 1.0) / 2.0;
  if (c > 1.0) c = 1.0;
  if (c < -1.0) c = -1.0;
  return std::acos(c);
}

}  // namespace ctgca
