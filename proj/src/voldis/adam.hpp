// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "voldis/common.hpp"

#include <span>
#include <vector>

namespace voldis {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<double> m;  // first moment
  std::vector<double> v;  // second moment
  int64_t step = 0;

  explicit AdamState(size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

// Bias-corrected Adam update in place. Throws NumericError on a non-finite
// gradient; the caller aborts the run rather than stepping on garbage.
void adam_step(std::span<double> params, std::span<const double> grads,
               AdamState& state, double lr, const AdamConfig& config);

// lr_start * (lr_end / lr_start)^(k / total): exponential decay hitting the
// endpoints exactly at k = 0 and k = total.
double exp_decay_lr(double lr_start, double lr_end, int64_t k, int64_t total);

}  // namespace voldis
