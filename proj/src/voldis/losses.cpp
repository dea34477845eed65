// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#include "voldis/losses.hpp"

namespace voldis {

double loss_full(std::span<const Vec3> predicted, std::span<const Vec3> target,
                 std::span<Vec3> adjoints) {
  require(predicted.size() == target.size() && adjoints.size() == predicted.size(),
          "loss_full: batch shapes differ");
  double loss = 0.0;
  for (size_t i = 0; i < predicted.size(); ++i) {
    Vec3 d = predicted[i] - target[i];
    loss += d.squaredNorm();
    adjoints[i] = 2.0 * d;
  }
  return loss;
}

double loss_masked_bg(std::span<const Vec3> predicted, std::span<const Vec3> target,
                      std::span<const double> mask, std::span<Vec3> adjoints) {
  require(predicted.size() == target.size() && adjoints.size() == predicted.size() &&
              mask.size() == predicted.size(),
          "loss_masked_bg: batch shapes differ");
  double loss = 0.0;
  for (size_t i = 0; i < predicted.size(); ++i) {
    require(mask[i] == 0.0 || mask[i] == 1.0, "loss_masked_bg: non-binary mask");
    if (mask[i] == 1.0) {
      adjoints[i] = Vec3::Zero();
      continue;
    }
    Vec3 d = predicted[i] - target[i];
    loss += d.squaredNorm();
    adjoints[i] = 2.0 * d;
  }
  return loss;
}

}  // namespace voldis
