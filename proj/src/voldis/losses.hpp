// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "voldis/common.hpp"

#include <span>
#include <vector>

namespace voldis {

// Sum of squared differences over the batch; adjoints are 2*(pred - target).
double loss_full(std::span<const Vec3> predicted, std::span<const Vec3> target,
                 std::span<Vec3> adjoints);

// Masked variant: pixels with mask = 1 (the foreground object) contribute
// nothing and receive zero adjoint; the field learns those regions from
// other views and correlated effects only. Mask must be binary.
double loss_masked_bg(std::span<const Vec3> predicted, std::span<const Vec3> target,
                      std::span<const double> mask, std::span<Vec3> adjoints);

}  // namespace voldis
