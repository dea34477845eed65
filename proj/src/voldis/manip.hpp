// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "voldis/dataset.hpp"
#include "voldis/renderer.hpp"
#include "voldis/scorer.hpp"
#include "voldis/trainer.hpp"

namespace voldis {

// Object removal is the background volume rendered in isolation.
RenderResult remove_object(const FieldPair& background, const ViewSpec& view,
                           const RenderOptions& opts);

// --------------------------------------------------------------------------
// Object transformation

struct TransformSpec {
  SimilarityTransform world;   // applied to the foreground object
  double focal_scale = 1.0;    // regenerate foreground rays with focal * scale
  // Where the transformed foreground has opacity its samples take precedence
  // over background samples (per-sample suppression above the threshold).
  double precedence_threshold = 1e-3;
  // Additionally attenuate background samples behind accumulated transformed
  // foreground opacity, so a moved object occludes what it now covers.
  bool occlusion_transfer = true;

  bool is_identity() const { return world.is_identity() && focal_scale == 1.0; }
};

// Foreground samples evaluated along rays warped by T^-1 (or rays regenerated
// with the scaled focal), background along the original rays, recombined via
// the per-sample composition. An identity spec reproduces the unmodified
// composite exactly.
RenderResult transform_foreground(const RadianceField& full, const RadianceField& bg,
                                  const ViewSpec& view, const TransformSpec& spec,
                                  const RenderOptions& opts,
                                  CompositionVariant variant = CompositionVariant::C1);

// --------------------------------------------------------------------------
// Fitted manipulations (camouflage, non-negative inpainting, semantic)

struct ManipConfig {
  int64_t iterations = 2000;
  int rays_per_batch = 1024;
  int n_samples = 128;  // aligned stratified samples per ray
  double lr_start = 5e-4;
  double lr_end = 5e-5;
  AdamConfig adam;
  uint64_t seed = 0;
  int threads = 0;
  int64_t checkpoint_every = 500;

  void validate() const;
};

struct ManipMetricsRow {
  int64_t iteration = 0;
  double loss = 0.0;
  double lr = 0.0;
  double aux = 0.0;  // probe value: masked MSE (camouflage/nonneg), scorer sim (semantic)
};

struct ManipResult {
  std::vector<ManipMetricsRow> trace;
  std::vector<double> per_view_final;  // per-view probe at the end
  double initial_probe = 0.0;          // aggregate probe before/after the fit
  double final_probe = 0.0;
};

using ManipMetricsSink = std::function<void(const ManipMetricsRow&)>;

// Everything frozen along one ray during a manipulation fit.
struct FrozenRay {
  RaySamples samples;
  RayProfile bg;
  ForegroundSamples fg;
  Vec3 bg_pixel = Vec3::Zero();
};
FrozenRay freeze_ray(const RadianceField& full, const RadianceField& bg, const Ray& ray,
                     int n_samples);

// Minimizes || x_c - x_bg ||^2 over the override field's colors with the
// foreground weights frozen; depth maps of the composite are untouched by
// construction. aux/per-view values are masked-region MSE to the background.
ManipResult camouflage(const RadianceField& full, const RadianceField& bg,
                       const PosedDataset& dataset, RadianceField& override_field,
                       const ManipConfig& config,
                       const ManipMetricsSink* sink = nullptr);

// Learns a residual volume rendered on its own rays such that
// || x_full + x_residual - x_bg ||^2 is minimized. Residual pixels are
// nonnegative by construction (raw field: colors in [0,1], weights >= 0).
ManipResult nonnegative_inpaint(const RadianceField& full, const RadianceField& bg,
                                const PosedDataset& dataset, RadianceField& residual_field,
                                const ManipConfig& config,
                                const ManipMetricsSink* sink = nullptr);

struct SemanticConfig {
  ScorerPrep prep;               // 128-point grid -> 224 scorer input
  double target_weight = 1.0;    // 1 - sim(masked composite, target)
  double bg_sim_weight = 1.0;    // 1 - sim(masked composite, masked background)
  double bg_pixel_weight = 1.0;  // || (x_c - x_bg) outside mask ||^2
  double opacity_mask_threshold = 0.05;  // novel-view masks
  int render_width = 0, render_height = 0;  // 0: dataset resolution
  int view_block = 8;  // consecutive iterations per view (profile cache reuse)
};

// Optimizes the override colors so the in-mask composite matches the scorer
// target while pixels outside the mask stay pinned to the background render.
// aux is the scorer similarity to the target.
ManipResult semantic_manipulate(const RadianceField& full, const RadianceField& bg,
                                const PosedDataset& dataset, SemanticScorer& scorer,
                                RadianceField& override_field,
                                const SemanticConfig& sem, const ManipConfig& config,
                                const ManipMetricsSink* sink = nullptr);

// Composite render with the override field supplying the foreground colors;
// a null override keeps the original foreground colors (same code path, so
// weight-derived maps compare bitwise).
RenderResult render_with_override(const RadianceField& full, const RadianceField& bg,
                                  const RadianceField* override_field,
                                  const ViewSpec& view, int n_samples, int threads);

// Binary mask for a novel pose: accumulated positive foreground weight
// thresholded at tau.
Image view_mask_from_opacity(const Image& fg_opacity, double tau);

// Intrinsics rescaled to another resolution (same field of view).
CameraIntrinsics scale_intrinsics(const CameraIntrinsics& intr, int width, int height);

}  // namespace voldis
