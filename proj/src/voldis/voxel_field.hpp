// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "voldis/field.hpp"

namespace voldis {

struct VoxelGridConfig {
  int nx = 64, ny = 64, nz = 64;  // vertex counts per axis, >= 2
  Vec3 bbox_min = Vec3(-1, -1, -1);
  Vec3 bbox_max = Vec3(1, 1, 1);
  double init_density = 0.1;   // stable early transmittance
  double init_color = 0.05;    // near-black so never-supervised cells stay dark
};

// Dense voxel grid with raw per-vertex color (3) and density (1) parameters.
// Raw values are trilinearly interpolated first, then squashed (sigmoid for
// color, softplus for density). Queries outside the box are empty space:
// zero density, zero color, zero gradient. Direction is ignored.
class VoxelGridField final : public RadianceField {
 public:
  explicit VoxelGridField(const VoxelGridConfig& config);

  std::string_view kind() const override { return "voxel"; }
  bool view_dependent() const override { return false; }

  size_t param_count() const override { return params_.size(); }
  std::span<double> params() override { return params_; }
  std::span<const double> params() const override { return params_; }

  FieldOutput eval(const Vec3& position, const Vec3& direction) const override;
  void eval_backward(std::span<const Vec3> positions, std::span<const Vec3> directions,
                     std::span<const FieldOutput> adjoints,
                     std::span<double> grad) const override;

  std::unique_ptr<RadianceField> clone() const override;

  const VoxelGridConfig& config() const { return config_; }

  // Raw (pre-squash) parameter access for one vertex; channel 0..2 color, 3 density.
  double raw_at(int ix, int iy, int iz, int channel) const;
  double& raw_at(int ix, int iy, int iz, int channel);

 private:
  struct Stencil {
    size_t corner[8];  // parameter base offsets of the 8 cell corners
    double weight[8];  // trilinear weights, sum to 1
    bool inside;
  };
  Stencil stencil(const Vec3& p) const;

  VoxelGridConfig config_;
  Vec3 inv_extent_;
  std::vector<double> params_;
};

}  // namespace voldis
