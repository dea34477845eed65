// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace voldis {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Bad caller input: shapes, ranges, missing files, malformed configs.
// Mapped to exit code 1 at the CLI boundary.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Full/background sample positions no longer line up; subtraction of the
// two volumes is meaningless past this point.
class AlignmentError : public InputError {
 public:
  explicit AlignmentError(const std::string& msg) : InputError(msg) {}
};

// Non-finite state detected (NaN loss, NaN gradient). Mapped to exit
// code 2 at the CLI boundary; runs abort rather than continue corrupted.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw InputError(msg);
}

// ---------------------------------------------------------------------------
// Counter-based RNG. Stateless: every draw is a hash of (seed, key...), so
// results do not depend on call order or thread scheduling.

inline uint64_t hash64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline uint64_t hash_combine(uint64_t a, uint64_t b) {
  return hash64(a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2)));
}

// Uniform in [0, 1).
inline double rng_uniform(uint64_t seed, uint64_t k1, uint64_t k2 = 0, uint64_t k3 = 0) {
  uint64_t h = hash_combine(hash_combine(hash_combine(seed, k1), k2), k3);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller on two counter draws.
inline double rng_normal(uint64_t seed, uint64_t k1, uint64_t k2 = 0) {
  double u1 = rng_uniform(seed, k1, k2, 1) + 1e-300;
  double u2 = rng_uniform(seed, k1, k2, 2);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// ---------------------------------------------------------------------------
// Squashing maps shared by all field representations. Colors live in (0,1)
// and densities in (0,inf) for every raw parameter value, so the field
// output invariants cannot be violated by training.

inline double sigmoid(double x) {
  if (x >= 0.0) {
    double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

inline double sigmoid_grad(double x) {
  double s = sigmoid(x);
  return s * (1.0 - s);
}

inline double softplus(double x) {
  if (x > 30.0) return x;
  return std::log1p(std::exp(x));
}

// softplus'(x) = sigmoid(x)
inline double softplus_inv(double y) {
  // y > 0; inverse of log1p(exp(x))
  if (y > 30.0) return y;
  return std::log(std::expm1(y));
}

inline double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

}  // namespace voldis
