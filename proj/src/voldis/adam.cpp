// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#include "voldis/adam.hpp"

namespace voldis {

void adam_step(std::span<double> params, std::span<const double> grads,
               AdamState& state, double lr, const AdamConfig& config) {
  require(params.size() == grads.size() && params.size() == state.m.size() &&
              params.size() == state.v.size(),
          "adam_step: parameter/gradient/state sizes differ");

  double sumsq = 0.0;
  for (double g : grads) sumsq += g * g;
  if (!std::isfinite(sumsq))
    throw NumericError("adam_step: non-finite gradient, aborting run");

  state.step += 1;
  double b1 = config.beta1, b2 = config.beta2;
  double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (size_t i = 0; i < params.size(); ++i) {
    double g = grads[i];
    state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
    state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g;
    double m_hat = state.m[i] / c1;
    double v_hat = state.v[i] / c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
}

double exp_decay_lr(double lr_start, double lr_end, int64_t k, int64_t total) {
  require(lr_start >= lr_end && lr_end > 0.0, "lr schedule: need lr_start >= lr_end > 0");
  if (total <= 0) return lr_start;
  double frac = static_cast<double>(k) / static_cast<double>(total);
  return lr_start * std::pow(lr_end / lr_start, frac);
}

}  // namespace voldis
