// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#include "voldis/field.hpp"

#include <string>

namespace voldis {

void RadianceField::eval_batch(std::span<const Vec3> positions,
                               std::span<const Vec3> directions,
                               std::span<FieldOutput> out) const {
  require(positions.size() == out.size() &&
              (directions.empty() || directions.size() == positions.size()),
          "eval_batch: batch lengths differ");
  for (size_t i = 0; i < positions.size(); ++i)
    out[i] = eval(positions[i], directions.empty() ? Vec3::Zero() : directions[i]);
}

void check_finite(const FieldOutput& out, std::string_view what) {
  if (!std::isfinite(out.density) || !out.color.allFinite())
    throw NumericError(std::string(what) + ": non-finite field output (corrupted parameters)");
}

}  // namespace voldis
