// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "voldis/adam.hpp"
#include "voldis/field.hpp"

#include <string>

namespace voldis {

// Flat little-endian checkpoint container:
//   "VDSF" | u32 version | u32 tag | u32 meta_len | meta bytes
//   | u64 param_count | f32 params[param_count]
// Tags: 1 = mlp, 2 = voxel, 3 = adam state sidecar (payload is m then v).
// Save -> load -> save reproduces the file byte for byte.
void save_field(const RadianceField& field, const std::string& path);
std::unique_ptr<RadianceField> load_field(const std::string& path);

void save_adam_state(const AdamState& state, const std::string& path);
AdamState load_adam_state(const std::string& path);

}  // namespace voldis
