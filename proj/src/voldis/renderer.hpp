// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "voldis/compositing.hpp"
#include "voldis/field.hpp"
#include "voldis/geometry.hpp"
#include "voldis/image.hpp"
#include "voldis/sampling.hpp"

#include <functional>
#include <optional>

namespace voldis {

struct SamplingConfig {
  int n_coarse = 64;
  int n_fine = 64;
  bool jitter = false;
  uint64_t seed = 0;
};

struct RenderOptions {
  SamplingConfig sampling;
  int threads = 0;
};

struct ViewSpec {
  CameraIntrinsics intrinsics;
  Pose pose;
  double t_near = 0.0;
  double t_far = 0.0;
};

struct RenderResult {
  Image color;      // H x W x 3, unclipped
  Image depth;      // H x W x 1
  Image disparity;  // H x W x 1
  Image opacity;    // H x W x 1
};

// Densities, colors, and compositing terms of one field along one ray.
struct RayProfile {
  RaySamples samples;
  std::vector<Vec3> colors;
  std::vector<double> densities;
  CompositeWeights cw;
};

// Signed per-sample differences (full - background), Eq. 5 of the method.
struct ForegroundSamples {
  std::vector<double> weights;  // w_full - w_bg
  std::vector<Vec3> colors;     // c_full - c_bg

  size_t size() const { return weights.size(); }
};

// Shared sample grid for aligned full/background evaluation: a stratified
// pass refined by importance samples from the proposal field when given.
// Positions depend only on (ray, config, ray_id), never on the field being
// evaluated afterwards, which is what keeps the two volumes aligned.
RaySamples aligned_samples(const Ray& ray, const RadianceField* proposal,
                           const SamplingConfig& config, uint64_t ray_id);

RayProfile eval_ray_profile(const RadianceField& field, const Ray& ray,
                            const RaySamples& samples);

// Exact per-sample subtraction. Both profiles must have been evaluated on
// identical t samples; disagreement beyond 1e-12 is an alignment error.
ForegroundSamples extract_foreground(const RayProfile& full, const RayProfile& bg);

// Recombination variants (ablation figure): c1 is the method, the others
// swap in full-volume quantities or collapse the sum into one product.
enum class CompositionVariant { C1, C2, C3, C4 };
CompositionVariant composition_variant_from_string(const std::string& name);

// Per-sample map applied to (weight, color) before recombination.
using SampleModifier = std::function<void(size_t index, double& weight, Vec3& color)>;

struct CompositePixel {
  Vec3 color = Vec3::Zero();
  std::vector<double> combined_weights;  // bg term + fg term weight per sample
};

// c_r = sum_i w'_bg c'_bg + w'_fg c'_fg (Eq. 6), with the variant switch.
// Identity modifiers and C1 reproduce the unmodified composition exactly.
// The c2/c3 variants substitute full-volume quantities; on aligned rays these
// are reconstructed as bg + fg, while transformed paths pass the values
// evaluated along their own warped rays explicitly.
CompositePixel composite_pixel(const RayProfile& bg, const ForegroundSamples& fg,
                               CompositionVariant variant = CompositionVariant::C1,
                               const SampleModifier* bg_modifier = nullptr,
                               const SampleModifier* fg_modifier = nullptr,
                               std::span<const double> full_weights = {},
                               std::span<const Vec3> full_colors = {});

// Standard single-volume render: stratified pass on `proposal` (or `field`
// if none), importance refinement, then `field` on the merged samples.
// Deterministic for a fixed seed; pixels are written by index.
RenderResult render_view(const RadianceField& field, const RadianceField* proposal,
                         const ViewSpec& view, const RenderOptions& opts);

// Aligned two-volume render of every pixel: foreground extraction plus
// recombination. The full field's coarse pass drives the shared samples.
struct DisentangledViews {
  RenderResult foreground;  // depth/disparity/opacity from positive fg weights
  RenderResult composite;
};
DisentangledViews render_disentangled(const RadianceField& full,
                                      const RadianceField* full_proposal,
                                      const RadianceField& background,
                                      const ViewSpec& view, const RenderOptions& opts,
                                      CompositionVariant variant = CompositionVariant::C1,
                                      const SampleModifier* bg_modifier = nullptr,
                                      const SampleModifier* fg_modifier = nullptr);

// Clip color to [0,1] for 8-bit export.
Image export_color(const Image& color);

void save_render(const RenderResult& r, const std::string& dir, const std::string& stem);

}  // namespace voldis
