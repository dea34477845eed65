// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "voldis/common.hpp"

#include <span>
#include <vector>

namespace voldis {

// Front-to-back compositing terms for one ray:
//   alpha_i = 1 - exp(-sigma_i * delta_i)
//   T_i     = prod_{j<i} (1 - alpha_j)
//   w_i     = alpha_i * T_i
// Weights are in [0,1] and sum to at most 1 for raw (nonnegative) fields.
struct CompositeWeights {
  std::vector<double> alpha;
  std::vector<double> weight;
  std::vector<double> transmittance;
  double accumulated_opacity = 0.0;

  size_t size() const { return weight.size(); }
};

CompositeWeights compositing_weights(std::span<const double> densities,
                                     std::span<const double> deltas);

// Adjoints of the weights (and optionally of the accumulated opacity) back
// to the densities. O(n) via suffix sums; exact.
void compositing_weights_backward(std::span<const double> densities,
                                  std::span<const double> deltas,
                                  const CompositeWeights& fwd,
                                  std::span<const double> weight_adjoints,
                                  double opacity_adjoint,
                                  std::span<double> density_adjoints);

// c = sum_i w_i * c_i. Signed values permitted (foreground path).
Vec3 composite(std::span<const double> weights, std::span<const Vec3> colors);

void composite_backward(std::span<const double> weights, std::span<const Vec3> colors,
                        const Vec3& pixel_adjoint,
                        std::span<double> weight_adjoints,
                        std::span<Vec3> color_adjoints);

// depth = sum(w*t) / (sum(w) + 1e-10); disparity = (sum(w) + 1e-10) / (sum(w*t) + 1e-10).
// Empty rays give depth 0 under the epsilon convention; the opacity map is
// what flags those pixels.
struct DepthResult {
  double depth = 0.0;
  double disparity = 0.0;
};
DepthResult expected_depth(std::span<const double> weights, std::span<const double> t_values);

}  // namespace voldis
