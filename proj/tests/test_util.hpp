#pragma once

#include <cmath>
#include <random>

#include "qpu/quat.hpp"

namespace qpu::testing {

inline double max_abs_diff(const Quaternion& a, const Quaternion& b) {
  double m = 0.0;
  for (int i = 0; i < 4; ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

inline double max_abs_diff(const Vec3& a, const Vec3& b) {
  return std::max({std::fabs(a.x - b.x), std::fabs(a.y - b.y), std::fabs(a.z - b.z)});
}

/// Mixed absolute/relative gradient-check error: relative for large entries,
/// absolute (floor 1) for small ones where finite differences carry noise.
inline double grad_error(double analytic, double fd) {
  return std::fabs(analytic - fd) / std::max({1.0, std::fabs(analytic), std::fabs(fd)});
}

inline Vec3 random_vec3(std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, scale);
  return {gauss(rng), gauss(rng), gauss(rng)};
}

}  // namespace qpu::testing
