#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace qpu {

/// Epsilon used to clamp arccos inputs away from ±1, where the derivative blows up.
inline constexpr double kArccosClamp = 1e-6;

/// Below this imaginary-part norm a quaternion's rotation axis is treated as degenerate.
inline constexpr double kAxisTol = 1e-12;

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  Vec3& operator*=(double k) { x *= k; y *= k; z *= k; return *this; }

  friend Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
  friend Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
  friend Vec3 operator*(Vec3 a, double k) { return a *= k; }
  friend Vec3 operator*(double k, Vec3 a) { return a *= k; }
  friend Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

/// A quaternion [s, (x, y, z)]: one real and three imaginary components.
/// Unit quaternions encode 3D rotations of angle theta about axis u as
/// [cos(theta/2), sin(theta/2) u]. Non-unit values are legal everywhere the
/// algebra is bilinear (products, gradients); operations that assume a rotation
/// say so.
struct Quaternion {
  double s = 1.0;
  Vec3 v;

  static Quaternion identity() { return {1.0, {0.0, 0.0, 0.0}}; }

  double& operator[](int i) { return i == 0 ? s : (i == 1 ? v.x : (i == 2 ? v.y : v.z)); }
  double operator[](int i) const { return i == 0 ? s : (i == 1 ? v.x : (i == 2 ? v.y : v.z)); }
};

/// Rotation as angle in [0, pi] plus unit axis. The axis is the zero vector when
/// the rotation is degenerate (angle ~ 0).
struct AngleAxis {
  double theta = 0.0;
  Vec3 axis;
};

inline double dot(const Quaternion& a, const Quaternion& b) {
  return a.s * b.s + dot(a.v, b.v);
}

inline double norm(const Quaternion& q) { return std::sqrt(dot(q, q)); }

inline Quaternion operator+(const Quaternion& a, const Quaternion& b) {
  return {a.s + b.s, a.v + b.v};
}

inline Quaternion operator-(const Quaternion& a, const Quaternion& b) {
  return {a.s - b.s, a.v - b.v};
}

inline Quaternion operator*(const Quaternion& a, double k) { return {a.s * k, a.v * k}; }
inline Quaternion operator*(double k, const Quaternion& a) { return a * k; }

/// Hamilton product q1 ⊗ q2 = [s1 s2 − ⟨v1,v2⟩, v1×v2 + s1 v2 + s2 v1].
/// Non-commutative; composes rotations (right operand applied first).
inline Quaternion hamilton(const Quaternion& q1, const Quaternion& q2) {
  return {q1.s * q2.s - dot(q1.v, q2.v),
          cross(q1.v, q2.v) + q1.s * q2.v + q2.s * q1.v};
}

/// Conjugation q* = [s, −v]; inverse of a unit quaternion.
inline Quaternion conjugate(const Quaternion& q) { return {q.s, -q.v}; }

/// Dense 4×4 real matrix, row-major. Used for the left/right Hamilton product
/// matrices and their transposed application in the backward pass.
struct Mat4 {
  std::array<double, 16> m{};

  double& operator()(int r, int c) { return m[static_cast<size_t>(r) * 4 + c]; }
  double operator()(int r, int c) const { return m[static_cast<size_t>(r) * 4 + c]; }

  static Mat4 identity() {
    Mat4 out;
    out(0, 0) = out(1, 1) = out(2, 2) = out(3, 3) = 1.0;
    return out;
  }

  /// M · q, treating the quaternion as the 4-vector (s, x, y, z).
  Quaternion apply(const Quaternion& q) const {
    Quaternion out{0.0, {0.0, 0.0, 0.0}};
    for (int r = 0; r < 4; ++r) {
      double acc = 0.0;
      for (int c = 0; c < 4; ++c) acc += (*this)(r, c) * q[c];
      out[r] = acc;
    }
    return out;
  }

  /// Mᵀ · q without materializing the transpose.
  Quaternion apply_transposed(const Quaternion& q) const {
    Quaternion out{0.0, {0.0, 0.0, 0.0}};
    for (int r = 0; r < 4; ++r) {
      double acc = 0.0;
      for (int c = 0; c < 4; ++c) acc += (*this)(c, r) * q[c];
      out[r] = acc;
    }
    return out;
  }
};

/// Left product matrix: left_matrix(q1) · q2 == hamilton(q1, q2).
inline Mat4 left_matrix(const Quaternion& q) {
  const double s = q.s, x = q.v.x, y = q.v.y, z = q.v.z;
  Mat4 out;
  out.m = {s, -x, -y, -z,
           x,  s, -z,  y,
           y,  z,  s, -x,
           z, -y,  x,  s};
  return out;
}

/// Right product matrix: right_matrix(q2) · q1 == hamilton(q1, q2).
inline Mat4 right_matrix(const Quaternion& q) {
  const double s = q.s, x = q.v.x, y = q.v.y, z = q.v.z;
  Mat4 out;
  out.m = {s, -x, -y, -z,
           x,  s,  z, -y,
           y, -z,  s,  x,
           z,  y, -x,  s};
  return out;
}

/// Both product matrices of q, (left, right).
inline std::pair<Mat4, Mat4> product_matrices(const Quaternion& q) {
  return {left_matrix(q), right_matrix(q)};
}

inline double clamp_arccos_input(double s) {
  return std::clamp(s, -1.0 + kArccosClamp, 1.0 - kArccosClamp);
}

/// Quaternion power q^w for unit q: scales the rotation angle by w, keeps the
/// axis. Degenerate axis (|v| ≤ kAxisTol) yields the identity. The scalar part
/// is clamped before arccos so the result stays finite near s = ±1.
inline Quaternion qpow(const Quaternion& q, double w) {
  const double r = norm(q.v);
  if (r <= kAxisTol) return Quaternion::identity();
  const double angle = w * std::acos(clamp_arccos_input(q.s));
  return {std::cos(angle), q.v * (std::sin(angle) / r)};
}

/// Rotate a 3-vector by a unit quaternion: [0, v'] = q ⊗ [0, v] ⊗ q*.
inline Vec3 rotate_vector(const Quaternion& q, const Vec3& p) {
  return hamilton(hamilton(q, Quaternion{0.0, p}), conjugate(q)).v;
}

/// Normalize and resolve the double cover: the returned unit quaternion has a
/// nonnegative real part; when s == 0 exactly, the first nonzero imaginary
/// component is made positive. Throws on a zero quaternion.
inline Quaternion normalize_canonical(const Quaternion& q) {
  const double n = norm(q);
  if (n <= 0.0 || !std::isfinite(n)) {
    throw std::invalid_argument("normalize_canonical: zero or non-finite quaternion");
  }
  Quaternion out{q.s / n, q.v * (1.0 / n)};
  bool flip = out.s < 0.0;
  if (out.s == 0.0) {
    const double lead = out.v.x != 0.0 ? out.v.x : (out.v.y != 0.0 ? out.v.y : out.v.z);
    flip = lead < 0.0;
  }
  if (flip) {
    out.s = -out.s;
    out.v = -out.v;
  }
  return out;
}

/// Unit quaternion rotating v1 onto v2: axis v1×v2 normalized, angle from the
/// inner product, built as [cos(theta/2), sin(theta/2) u] with positive real
/// part. Parallel inputs return the identity; anti-parallel inputs rotate by pi
/// about a deterministic axis orthogonal to v1 (cross with the standard basis
/// vector least aligned with v1). Throws on zero-length input.
inline Quaternion from_two_vectors(const Vec3& v1, const Vec3& v2) {
  const double n1 = norm(v1), n2 = norm(v2);
  if (n1 <= 0.0 || n2 <= 0.0) {
    throw std::invalid_argument("from_two_vectors: zero-length input vector");
  }
  const double cos_theta = std::clamp(dot(v1, v2) / (n1 * n2), -1.0, 1.0);
  const Vec3 c = cross(v1, v2);
  const double cn = norm(c);
  if (cn / (n1 * n2) <= kAxisTol) {
    if (cos_theta > 0.0) return Quaternion::identity();
    // Anti-parallel: half-turn about the axis least aligned with v1.
    const double ax = std::fabs(v1.x), ay = std::fabs(v1.y), az = std::fabs(v1.z);
    Vec3 basis{0.0, 0.0, 0.0};
    if (ax <= ay && ax <= az) basis.x = 1.0;
    else if (ay <= az) basis.y = 1.0;
    else basis.z = 1.0;
    Vec3 axis = cross(v1, basis);
    axis *= 1.0 / norm(axis);
    return normalize_canonical(Quaternion{0.0, axis});
  }
  const double theta = std::acos(cos_theta);
  const Quaternion out{std::cos(theta / 2.0), c * (std::sin(theta / 2.0) / cn)};
  return normalize_canonical(out);
}

/// Disentangled map of a unit quaternion to (angle, unit axis):
/// [arccos(s), v/|v|]. The scalar part is clamped before arccos; a degenerate
/// axis maps to the zero vector.
inline AngleAxis angle_axis_map(const Quaternion& q) {
  AngleAxis out;
  out.theta = std::acos(clamp_arccos_input(q.s));
  const double r = norm(q.v);
  if (r > kAxisTol) out.axis = q.v * (1.0 / r);
  return out;
}

}  // namespace qpu
