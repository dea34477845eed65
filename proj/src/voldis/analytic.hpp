// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "voldis/field.hpp"
#include "voldis/renderer.hpp"

#include <string>
#include <vector>

namespace voldis {

enum class PrimitiveTag { Foreground, Background };
enum class SceneSubset { All, Foreground, Background };

struct Primitive {
  enum class Shape { Sphere, Box };
  Shape shape = Shape::Sphere;
  Vec3 center = Vec3::Zero();  // sphere
  double radius = 1.0;
  Vec3 box_min = Vec3::Zero();  // box
  Vec3 box_max = Vec3::Zero();
  double density = 1.0;  // sigma_0 > 0
  Vec3 albedo = Vec3::Ones();
  PrimitiveTag tag = PrimitiveTag::Background;
  // Optional view-dependent tint (background primitives): the albedo is
  // scaled by 1 + strength * dot(ray direction, tint_direction), clamped to
  // [0,1]. Approximates the captured scenes' illumination coupling.
  double tint_strength = 0.0;
  Vec3 tint_direction = Vec3::UnitZ();

  bool contains(const Vec3& p) const;
  static Primitive sphere(const Vec3& center, double radius, double density,
                          const Vec3& albedo, PrimitiveTag tag);
  static Primitive box(const Vec3& lo, const Vec3& hi, double density,
                       const Vec3& albedo, PrimitiveTag tag);
};

struct AnalyticScene {
  std::vector<Primitive> primitives;

  void validate() const;
  Vec3 centroid() const;
  void bounds(Vec3* lo, Vec3* hi) const;
  bool in_subset(const Primitive& p, SceneSubset subset) const;
};

struct AnalyticSample {
  double density = 0.0;
  Vec3 color = Vec3::Zero();
};

// density: sum of sigma_0 over containing primitives in the subset;
// color: density-weighted mean albedo, zero where the density is zero.
AnalyticSample analytic_eval(const AnalyticScene& scene, const Vec3& p,
                             SceneSubset subset);
// Direction-aware variant applying the optional tint; used by the marcher
// and the field adapter.
AnalyticSample analytic_eval_dir(const AnalyticScene& scene, const Vec3& p,
                                 const Vec3& direction, SceneSubset subset);

// Ground-truth renderer: dense fixed-step midpoint ray march against
// analytic_eval, supersample x supersample sub-rays per pixel.
struct OracleRenderConfig {
  int march_steps = 512;
  int supersample = 2;
  int threads = 0;
};
RenderResult oracle_render(const AnalyticScene& scene, SceneSubset subset,
                           const ViewSpec& view, const OracleRenderConfig& config);

// RadianceField adapter over the oracle; zero trainable parameters. Lets the
// rendering, extraction, and manipulation machinery run against exact
// volumes in tests.
class AnalyticField final : public RadianceField {
 public:
  AnalyticField(AnalyticScene scene, SceneSubset subset)
      : scene_(std::move(scene)), subset_(subset) {
    scene_.validate();
  }

  std::string_view kind() const override { return "analytic"; }
  bool view_dependent() const override { return true; }
  size_t param_count() const override { return 0; }
  std::span<double> params() override { return {}; }
  std::span<const double> params() const override { return {}; }
  FieldOutput eval(const Vec3& p, const Vec3& d) const override;
  void eval_backward(std::span<const Vec3>, std::span<const Vec3>,
                     std::span<const FieldOutput>, std::span<double>) const override {}
  std::unique_ptr<RadianceField> clone() const override {
    return std::make_unique<AnalyticField>(scene_, subset_);
  }

 private:
  AnalyticScene scene_;
  SceneSubset subset_;
};

// Applies a similarity transform to the foreground primitives (ground truth
// for transform tests). Boxes only support translation and scaling.
AnalyticScene transform_scene_foreground(const AnalyticScene& scene,
                                         const SimilarityTransform& T);

// Named desk-scale presets: "default" (red sphere before a dim box) and
// "camo" (dark sphere before a bright box, sized for the manipulation tasks).
AnalyticScene make_scene_preset(const std::string& name);

// Forward-facing camera arc aimed at the scene centroid.
struct ArcSpec {
  int n_views = 20;
  double distance = 2.8;
  double arc_degrees = 36.0;
  double elevation_degrees = 6.0;
  double focal_scale = 0.97;  // focal = focal_scale * image width
};
ViewSpec arc_view(const AnalyticScene& scene, const ArcSpec& arc, int index,
                  int width, int height, double t_near, double t_far);
// t range covering the scene from every arc position.
void arc_t_range(const AnalyticScene& scene, const ArcSpec& arc,
                 double* t_near, double* t_far);

}  // namespace voldis
