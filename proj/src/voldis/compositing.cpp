// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#include "voldis/compositing.hpp"

namespace voldis {

CompositeWeights compositing_weights(std::span<const double> densities,
                                     std::span<const double> deltas) {
  require(densities.size() == deltas.size(), "compositing: sigma/delta lengths differ");
  size_t n = densities.size();
  CompositeWeights cw;
  cw.alpha.resize(n);
  cw.weight.resize(n);
  cw.transmittance.resize(n);
  double trans = 1.0;
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) {
    require(densities[i] >= 0.0, "compositing: negative density");
    require(deltas[i] > 0.0, "compositing: non-positive delta");
    // expm1/exp keep both factors at full precision for tiny and huge
    // optical depths alike.
    double x = densities[i] * deltas[i];
    double a = -std::expm1(-x);
    cw.alpha[i] = a;
    cw.transmittance[i] = trans;
    cw.weight[i] = a * trans;
    acc += cw.weight[i];
    trans *= std::exp(-x);
  }
  cw.accumulated_opacity = acc;
  return cw;
}

void compositing_weights_backward(std::span<const double> densities,
                                  std::span<const double> deltas,
                                  const CompositeWeights& fwd,
                                  std::span<const double> weight_adjoints,
                                  double opacity_adjoint,
                                  std::span<double> density_adjoints) {
  size_t n = densities.size();
  require(fwd.size() == n && weight_adjoints.size() == n && density_adjoints.size() == n,
          "compositing backward: length mismatch");

  // w_i = (1 - exp(-sigma_i delta_i)) * exp(-sum_{j<i} sigma_j delta_j), so
  //   dw_i/dsigma_i = delta_i * (1 - alpha_i) * T_i
  //   dw_i/dsigma_k = -delta_k * w_i            (k < i)
  // Accumulated opacity folds into the per-weight adjoints.
  std::vector<double> g(weight_adjoints.begin(), weight_adjoints.end());
  if (opacity_adjoint != 0.0)
    for (size_t i = 0; i < n; ++i) g[i] += opacity_adjoint;

  double suffix = 0.0;  // sum_{i>k} g_i * w_i
  for (size_t k = n; k-- > 0;) {
    double diag = g[k] * deltas[k] * (1.0 - fwd.alpha[k]) * fwd.transmittance[k];
    density_adjoints[k] += diag - deltas[k] * suffix;
    suffix += g[k] * fwd.weight[k];
  }
}

Vec3 composite(std::span<const double> weights, std::span<const Vec3> colors) {
  require(weights.size() == colors.size(), "composite: weight/color lengths differ");
  Vec3 c = Vec3::Zero();
  for (size_t i = 0; i < weights.size(); ++i) c += weights[i] * colors[i];
  return c;
}

void composite_backward(std::span<const double> weights, std::span<const Vec3> colors,
                        const Vec3& pixel_adjoint,
                        std::span<double> weight_adjoints,
                        std::span<Vec3> color_adjoints) {
  require(weights.size() == colors.size() && weight_adjoints.size() == weights.size() &&
              color_adjoints.size() == weights.size(),
          "composite backward: length mismatch");
  for (size_t i = 0; i < weights.size(); ++i) {
    weight_adjoints[i] += colors[i].dot(pixel_adjoint);
    color_adjoints[i] += weights[i] * pixel_adjoint;
  }
}

DepthResult expected_depth(std::span<const double> weights,
                           std::span<const double> t_values) {
  require(weights.size() == t_values.size(), "expected_depth: length mismatch");
  double sum_w = 0.0, sum_wt = 0.0;
  for (size_t i = 0; i < weights.size(); ++i) {
    sum_w += weights[i];
    sum_wt += weights[i] * t_values[i];
  }
  DepthResult r;
  r.depth = sum_wt / (sum_w + 1e-10);
  r.disparity = (sum_w + 1e-10) / (sum_wt + 1e-10);
  return r;
}

}  // namespace voldis
