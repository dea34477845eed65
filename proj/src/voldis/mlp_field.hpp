// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "voldis/encoding.hpp"
#include "voldis/field.hpp"

namespace voldis {

struct MlpConfig {
  int hidden_layers = 4;
  int width = 128;
  int color_width = 64;
  int pos_features = 128;
  double pos_sigma = 10.0;
  int dir_features = 16;
  double dir_sigma = 4.0;
  bool view_dependent = true;
  double init_density = 0.1;  // density head bias starts at softplus_inv of this
  uint64_t seed = 0;
};

// Fourier-feature MLP. Trunk of ReLU layers on the encoded position; density
// head softplus(linear(trunk)); color branch takes [trunk, encoded direction]
// through one ReLU layer into a sigmoid RGB head. Weights are fan-in-scaled
// uniform, reproducible from the config seed.
class MlpField final : public RadianceField {
 public:
  explicit MlpField(const MlpConfig& config);

  std::string_view kind() const override { return "mlp"; }
  bool view_dependent() const override { return config_.view_dependent; }

  size_t param_count() const override { return params_.size(); }
  std::span<double> params() override { return params_; }
  std::span<const double> params() const override { return params_; }

  FieldOutput eval(const Vec3& position, const Vec3& direction) const override;
  void eval_backward(std::span<const Vec3> positions, std::span<const Vec3> directions,
                     std::span<const FieldOutput> adjoints,
                     std::span<double> grad) const override;

  std::unique_ptr<RadianceField> clone() const override;

  const MlpConfig& config() const { return config_; }
  const FourierEncoding& position_encoding() const { return pos_enc_; }

 private:
  struct Block {
    size_t weight_off = 0;  // rows x cols, column-major
    size_t bias_off = 0;
    int rows = 0, cols = 0;
  };

  struct Scratch;
  void forward(const Vec3& p, const Vec3& d, Scratch& s) const;

  MlpConfig config_;
  FourierEncoding pos_enc_;
  FourierEncoding dir_enc_;
  std::vector<Block> trunk_;
  Block density_head_;
  Block color_hidden_;
  Block color_out_;
  std::vector<double> params_;
};

}  // namespace voldis
