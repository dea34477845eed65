// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#include "voldis/voxel_field.hpp"

#include <algorithm>

namespace voldis {

VoxelGridField::VoxelGridField(const VoxelGridConfig& config) : config_(config) {
  require(config.nx >= 2 && config.ny >= 2 && config.nz >= 2,
          "voxel field: resolution must be at least 2 per axis");
  require((config.bbox_max - config.bbox_min).minCoeff() > 0.0,
          "voxel field: bounding box must have positive extent");
  require(config.init_density > 0.0 && config.init_color > 0.0 && config.init_color < 1.0,
          "voxel field: init values out of range");
  for (int i = 0; i < 3; ++i)
    inv_extent_[i] = 1.0 / (config.bbox_max[i] - config.bbox_min[i]);

  size_t n_vertices = static_cast<size_t>(config.nx) * config.ny * config.nz;
  params_.resize(n_vertices * 4);
  double raw_c = -std::log(1.0 / config.init_color - 1.0);  // sigmoid inverse
  double raw_d = softplus_inv(config.init_density);
  for (size_t v = 0; v < n_vertices; ++v) {
    params_[v * 4 + 0] = raw_c;
    params_[v * 4 + 1] = raw_c;
    params_[v * 4 + 2] = raw_c;
    params_[v * 4 + 3] = raw_d;
  }
}

double VoxelGridField::raw_at(int ix, int iy, int iz, int channel) const {
  size_t v = (static_cast<size_t>(iz) * config_.ny + iy) * config_.nx + ix;
  return params_[v * 4 + channel];
}

double& VoxelGridField::raw_at(int ix, int iy, int iz, int channel) {
  size_t v = (static_cast<size_t>(iz) * config_.ny + iy) * config_.nx + ix;
  return params_[v * 4 + channel];
}

VoxelGridField::Stencil VoxelGridField::stencil(const Vec3& p) const {
  Stencil s;
  double u[3], f[3];
  int i0[3];
  const int dims[3] = {config_.nx, config_.ny, config_.nz};
  for (int a = 0; a < 3; ++a) {
    u[a] = (p[a] - config_.bbox_min[a]) * inv_extent_[a] * (dims[a] - 1);
    if (u[a] < 0.0 || u[a] > dims[a] - 1) {
      s.inside = false;
      return s;
    }
    i0[a] = std::min(static_cast<int>(u[a]), dims[a] - 2);
    f[a] = u[a] - i0[a];
  }
  s.inside = true;
  int k = 0;
  for (int dz = 0; dz < 2; ++dz)
    for (int dy = 0; dy < 2; ++dy)
      for (int dx = 0; dx < 2; ++dx) {
        size_t v = (static_cast<size_t>(i0[2] + dz) * config_.ny + (i0[1] + dy)) *
                       config_.nx + (i0[0] + dx);
        s.corner[k] = v * 4;
        s.weight[k] = (dx ? f[0] : 1.0 - f[0]) * (dy ? f[1] : 1.0 - f[1]) *
                      (dz ? f[2] : 1.0 - f[2]);
        ++k;
      }
  return s;
}

FieldOutput VoxelGridField::eval(const Vec3& position, const Vec3&) const {
  FieldOutput out;
  Stencil s = stencil(position);
  if (!s.inside) return out;
  double raw[4] = {0, 0, 0, 0};
  for (int k = 0; k < 8; ++k) {
    const double* base = params_.data() + s.corner[k];
    double w = s.weight[k];
    raw[0] += w * base[0];
    raw[1] += w * base[1];
    raw[2] += w * base[2];
    raw[3] += w * base[3];
  }
  out.color = Vec3(sigmoid(raw[0]), sigmoid(raw[1]), sigmoid(raw[2]));
  out.density = softplus(raw[3]);
  check_finite(out, "voxel field");
  return out;
}

void VoxelGridField::eval_backward(std::span<const Vec3> positions,
                                   std::span<const Vec3>,
                                   std::span<const FieldOutput> adjoints,
                                   std::span<double> grad) const {
  require(positions.size() == adjoints.size(), "voxel backward: batch lengths differ");
  require(grad.size() == params_.size(), "voxel backward: gradient buffer size mismatch");
  for (size_t i = 0; i < positions.size(); ++i) {
    Stencil s = stencil(positions[i]);
    if (!s.inside) continue;
    double raw[4] = {0, 0, 0, 0};
    for (int k = 0; k < 8; ++k) {
      const double* base = params_.data() + s.corner[k];
      double w = s.weight[k];
      raw[0] += w * base[0];
      raw[1] += w * base[1];
      raw[2] += w * base[2];
      raw[3] += w * base[3];
    }
    // Chain through the squash at the interpolated raw value.
    double g[4];
    for (int c = 0; c < 3; ++c) g[c] = adjoints[i].color[c] * sigmoid_grad(raw[c]);
    g[3] = adjoints[i].density * sigmoid(raw[3]);
    for (int k = 0; k < 8; ++k) {
      double* base = grad.data() + s.corner[k];
      double w = s.weight[k];
      base[0] += w * g[0];
      base[1] += w * g[1];
      base[2] += w * g[2];
      base[3] += w * g[3];
    }
  }
}

std::unique_ptr<RadianceField> VoxelGridField::clone() const {
  return std::make_unique<VoxelGridField>(*this);
}

}  // namespace voldis
