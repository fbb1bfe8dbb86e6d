// Dense 3-vector / 3x3-matrix value types plus the small spectral kernels
// (cyclic Jacobi for symmetric matrices, polar decomposition) everything else
// in the library is built on. Header-only on purpose: these are arithmetic
// types, not services.
#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace magelas {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  double &operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  Vec3 operator+(const Vec3 &o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3 &o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3 &operator+=(const Vec3 &o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  Vec3 &operator-=(const Vec3 &o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  Vec3 &operator*=(double s) {
    x *= s;
    y *= s;
    z *= s;
    return *this;
  }
};

inline Vec3 operator*(double s, const Vec3 &v) { return v * s; }

inline double dot(const Vec3 &a, const Vec3 &b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

inline Vec3 cross(const Vec3 &a, const Vec3 &b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3 &v) { return std::sqrt(dot(v, v)); }

inline Vec3 normalized(const Vec3 &v) {
  const double n = norm(v);
  if (n == 0.0)
    throw std::domain_error("normalized: zero vector");
  return v / n;
}

// Row-major 3x3 matrix.
struct Mat3 {
  std::array<double, 9> m{{0, 0, 0, 0, 0, 0, 0, 0, 0}};

  double &operator()(int i, int j) { return m[3 * i + j]; }
  double operator()(int i, int j) const { return m[3 * i + j]; }

  static Mat3 identity() {
    Mat3 r;
    r.m = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    return r;
  }
  static Mat3 zero() { return Mat3{}; }
  static Mat3 diag(double a, double b, double c) {
    Mat3 r;
    r(0, 0) = a;
    r(1, 1) = b;
    r(2, 2) = c;
    return r;
  }

  Mat3 operator+(const Mat3 &o) const {
    Mat3 r;
    for (int i = 0; i < 9; ++i)
      r.m[i] = m[i] + o.m[i];
    return r;
  }
  Mat3 operator-(const Mat3 &o) const {
    Mat3 r;
    for (int i = 0; i < 9; ++i)
      r.m[i] = m[i] - o.m[i];
    return r;
  }
  Mat3 operator*(double s) const {
    Mat3 r;
    for (int i = 0; i < 9; ++i)
      r.m[i] = m[i] * s;
    return r;
  }
  Mat3 &operator+=(const Mat3 &o) {
    for (int i = 0; i < 9; ++i)
      m[i] += o.m[i];
    return *this;
  }
  Mat3 &operator-=(const Mat3 &o) {
    for (int i = 0; i < 9; ++i)
      m[i] -= o.m[i];
    return *this;
  }

  Mat3 operator*(const Mat3 &o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        r(i, j) = (*this)(i, 0) * o(0, j) + (*this)(i, 1) * o(1, j) +
                  (*this)(i, 2) * o(2, j);
    return r;
  }
  Vec3 operator*(const Vec3 &v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
            m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }
};

inline Mat3 operator*(double s, const Mat3 &a) { return a * s; }

inline Mat3 transpose(const Mat3 &a) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      r(i, j) = a(j, i);
  return r;
}

inline double trace(const Mat3 &a) { return a(0, 0) + a(1, 1) + a(2, 2); }

// Exact cofactor-expansion determinant; the cubic coefficient P3 of the
// perturbation identity det(I + t G) = 1 + t P1 + t^2 P2 + t^3 P3.
inline double det(const Mat3 &a) {
  return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
         a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
         a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

// Cofactor matrix, i.e. cof(A) = det(A) * A^{-T} for invertible A.
inline Mat3 cofactor(const Mat3 &a) {
  Mat3 c;
  c(0, 0) = a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1);
  c(0, 1) = a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2);
  c(0, 2) = a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0);
  c(1, 0) = a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2);
  c(1, 1) = a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0);
  c(1, 2) = a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1);
  c(2, 0) = a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1);
  c(2, 1) = a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2);
  c(2, 2) = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  return c;
}

inline Mat3 inverse(const Mat3 &a) {
  const double d = det(a);
  if (std::abs(d) < 1e-300)
    throw std::domain_error("inverse: singular matrix");
  return transpose(cofactor(a)) * (1.0 / d);
}

inline Mat3 outer(const Vec3 &a, const Vec3 &b) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      r(i, j) = a[i] * b[j];
  return r;
}

inline Mat3 sym(const Mat3 &a) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      r(i, j) = 0.5 * (a(i, j) + a(j, i));
  return r;
}

// Frobenius inner product and norm.
inline double ddot(const Mat3 &a, const Mat3 &b) {
  double s = 0.0;
  for (int i = 0; i < 9; ++i)
    s += a.m[i] * b.m[i];
  return s;
}

inline double fnorm(const Mat3 &a) { return std::sqrt(ddot(a, a)); }

// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
// Returns eigenvalues in `eval` (ascending) and the matching orthonormal
// eigenvectors as the columns of `evec`. Plenty for 3x3: converges to
// machine precision in a handful of sweeps.
inline void jacobi_eigen_sym(const Mat3 &s, Vec3 &eval, Mat3 &evec) {
  Mat3 a = sym(s); // tolerate tiny asymmetry from upstream arithmetic
  Mat3 v = Mat3::identity();
  for (int sweep = 0; sweep < 32; ++sweep) {
    double off = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
    if (off < 1e-300)
      break;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        if (a(p, q) == 0.0)
          continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        Mat3 r = Mat3::identity();
        r(p, p) = c;
        r(q, q) = c;
        r(p, q) = sn;
        r(q, p) = -sn;
        a = transpose(r) * a * r;
        a(p, q) = 0.0; // annihilated by construction; clear roundoff
        a(q, p) = 0.0;
        v = v * r;
      }
    }
  }
  // Sort eigenpairs ascending.
  std::array<int, 3> idx = {0, 1, 2};
  std::array<double, 3> lam = {a(0, 0), a(1, 1), a(2, 2)};
  for (int i = 0; i < 2; ++i)
    for (int j = i + 1; j < 3; ++j)
      if (lam[idx[j]] < lam[idx[i]])
        std::swap(idx[i], idx[j]);
  Mat3 vs;
  for (int k = 0; k < 3; ++k) {
    eval[k] = lam[idx[k]];
    for (int i = 0; i < 3; ++i)
      vs(i, k) = v(i, idx[k]);
  }
  evec = vs;
}

// Largest singular value (operator 2-norm).
inline double spectral_norm(const Mat3 &a) {
  Vec3 lam;
  Mat3 v;
  jacobi_eigen_sym(transpose(a) * a, lam, v);
  return std::sqrt(std::max(lam[2], 0.0));
}

// Rotation factor of the polar decomposition A = R S (S symmetric positive
// definite), for matrices with det A > 0. R is the closest rotation to A in
// the Frobenius distance.
inline Mat3 polar_rotation(const Mat3 &a) {
  if (!(det(a) > 0.0))
    throw std::domain_error("polar_rotation: det(A) must be positive");
  Vec3 lam;
  Mat3 v;
  jacobi_eigen_sym(transpose(a) * a, lam, v);
  Mat3 sinv = Mat3::zero();
  for (int k = 0; k < 3; ++k) {
    const double l = std::max(lam[k], 1e-300);
    sinv(k, k) = 1.0 / std::sqrt(l);
  }
  return a * (v * sinv * transpose(v));
}

// Quaternion-free rotation about a unit axis, used by tests and the sphere
// module for objectivity checks.
inline Mat3 axis_angle_rotation(const Vec3 &axis_unit, double angle) {
  const Vec3 u = axis_unit;
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 r = Mat3::identity() * c + outer(u, u) * (1.0 - c);
  Mat3 w;
  w(0, 1) = -u.z;
  w(0, 2) = u.y;
  w(1, 0) = u.z;
  w(1, 2) = -u.x;
  w(2, 0) = -u.y;
  w(2, 1) = u.x;
  return r + w * s;
}

} // namespace magelas
