// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "voldis/common.hpp"

#include <memory>
#include <span>
#include <string_view>
#include <vector>

namespace voldis {

struct FieldOutput {
  Vec3 color = Vec3::Zero();  // in [0,1]^3
  double density = 0.0;       // >= 0, per world unit
};

// Trainable (position, direction) -> (color, density) mapping. Evaluation is
// read-only over parameters and safe to call from many threads; backward
// accumulates into a caller-owned gradient buffer, so parallel callers use
// one buffer per worker and merge in a fixed order.
class RadianceField {
 public:
  virtual ~RadianceField() = default;

  virtual std::string_view kind() const = 0;
  virtual bool view_dependent() const = 0;

  virtual size_t param_count() const = 0;
  virtual std::span<double> params() = 0;
  virtual std::span<const double> params() const = 0;

  virtual FieldOutput eval(const Vec3& position, const Vec3& direction) const = 0;

  void eval_batch(std::span<const Vec3> positions, std::span<const Vec3> directions,
                  std::span<FieldOutput> out) const;

  // Accumulates d(sum_i <adjoint_i, output_i>)/d(params) into grad
  // (size param_count). Recomputes the forward pass internally.
  virtual void eval_backward(std::span<const Vec3> positions,
                             std::span<const Vec3> directions,
                             std::span<const FieldOutput> adjoints,
                             std::span<double> grad) const = 0;

  virtual std::unique_ptr<RadianceField> clone() const = 0;
};

// Throws NumericError when the output carries NaN/Inf (the symptom of
// corrupted parameters).
void check_finite(const FieldOutput& out, std::string_view what);

}  // namespace voldis
