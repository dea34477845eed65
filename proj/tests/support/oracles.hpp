// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0
//
// Test-only oracles, independent of the implementation paths they check.

#pragma once

#include "voldis/common.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace voldis::testing {

// Relative error with the spec's floor on the reference magnitude.
inline double rel_err(double analytic, double reference) {
  return std::abs(analytic - reference) / std::max(std::abs(reference), 1e-6);
}

// Central finite difference of a scalar function at coordinate x.
inline double central_diff(const std::function<double(double)>& f, double x,
                           double h = 1e-4) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Brute-force compositing weights: direct evaluation of the closed form
//   w_i = (1 - exp(-sigma_i delta_i)) * prod_{j<i} exp(-sigma_j delta_j)
// in extended precision, one term at a time.
inline std::vector<double> brute_force_weights(const std::vector<double>& sigma,
                                               const std::vector<double>& delta) {
  std::vector<double> w(sigma.size());
  for (size_t i = 0; i < sigma.size(); ++i) {
    long double trans = 1.0L;
    for (size_t j = 0; j < i; ++j) trans *= std::exp(-(long double)sigma[j] * delta[j]);
    w[i] = static_cast<double>(-std::expm1(-(long double)sigma[i] * delta[i]) * trans);
  }
  return w;
}

// Brute-force trilinear interpolation over a unit cell given 8 corner values
// ordered (x fastest, then y, then z).
inline double brute_force_trilerp(const double c[8], double fx, double fy, double fz) {
  double v = 0.0;
  for (int k = 0; k < 8; ++k) {
    double wx = (k & 1) ? fx : 1.0 - fx;
    double wy = (k & 2) ? fy : 1.0 - fy;
    double wz = (k & 4) ? fz : 1.0 - fz;
    v += c[k] * wx * wy * wz;
  }
  return v;
}

}  // namespace voldis::testing
