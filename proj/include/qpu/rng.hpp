#pragma once

#include <cstdint>
#include <random>

#include "qpu/quat.hpp"

namespace qpu {

/// splitmix64 step; used to derive independent stream seeds from a base seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic per-(stream, index) seed derivation. Samples, epochs, and
/// evaluation rotations each get their own stream so results do not depend on
/// processing order or worker count.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(base ^ (stream * 0x9e3779b97f4a7c15ULL)) + index);
}

/// Uniform random rotation: normalized 4-dimensional Gaussian sample,
/// canonicalized to the positive-real-part representative.
inline Quaternion random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Quaternion q{gauss(rng), {gauss(rng), gauss(rng), gauss(rng)}};
  while (norm(q) < 1e-6) {
    q = {gauss(rng), {gauss(rng), gauss(rng), gauss(rng)}};
  }
  return normalize_canonical(q);
}

/// Random unit quaternion (not canonicalized; covers both hemispheres).
inline Quaternion random_unit_quaternion(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Quaternion q{gauss(rng), {gauss(rng), gauss(rng), gauss(rng)}};
  while (norm(q) < 1e-6) {
    q = {gauss(rng), {gauss(rng), gauss(rng), gauss(rng)}};
  }
  const double n = norm(q);
  return {q.s / n, q.v * (1.0 / n)};
}

}  // namespace qpu
