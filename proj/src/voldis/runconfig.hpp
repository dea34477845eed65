// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "voldis/dataset.hpp"
#include "voldis/manip.hpp"
#include "voldis/trainer.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace voldis {

// The whole run configuration as JSON. Defaults carry the published training
// choices (Adam betas, exponential learning-rate decay 5e-4 -> 5e-5, the
// 504x378 / 252x189 render resolutions, the 128-grid -> 224 scorer prep).
// Unknown keys are rejected with the offending path.
nlohmann::json default_run_config();

// defaults <- file <- overrides, validating every key against the defaults.
nlohmann::json resolve_run_config(const nlohmann::json& file_config,
                                  const nlohmann::json& overrides);
nlohmann::json load_config_file(const std::string& path);

// Typed views over a resolved config.
struct RunSettings {
  uint64_t seed = 0;
  int threads = 0;
  bool deterministic = true;
};
RunSettings settings_from(const nlohmann::json& config);
TrainConfig train_config_from(const nlohmann::json& config);
LossKind loss_kind_from(const nlohmann::json& config);
ManipConfig manip_config_from(const nlohmann::json& config);
SemanticConfig semantic_config_from(const nlohmann::json& config);
GenerateConfig generate_config_from(const nlohmann::json& config);
TransformSpec transform_spec_from(const nlohmann::json& config);

// Fresh coarse/fine fields per the "field" block.
FieldPair make_field_pair(const nlohmann::json& config);

// Composite/extraction sample count and variant.
int composite_samples_from(const nlohmann::json& config);
CompositionVariant composite_variant_from(const nlohmann::json& config);

void write_effective_config(const nlohmann::json& config, const std::string& run_dir);

}  // namespace voldis
