// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#include "voldis/analytic.hpp"

#include "voldis/threading.hpp"

#include <algorithm>

namespace voldis {

bool Primitive::contains(const Vec3& p) const {
  if (shape == Shape::Sphere) return (p - center).squaredNorm() <= radius * radius;
  return (p.array() >= box_min.array()).all() && (p.array() <= box_max.array()).all();
}

Primitive Primitive::sphere(const Vec3& center, double radius, double density,
                            const Vec3& albedo, PrimitiveTag tag) {
  Primitive pr;
  pr.shape = Shape::Sphere;
  pr.center = center;
  pr.radius = radius;
  pr.density = density;
  pr.albedo = albedo;
  pr.tag = tag;
  return pr;
}

Primitive Primitive::box(const Vec3& lo, const Vec3& hi, double density,
                         const Vec3& albedo, PrimitiveTag tag) {
  Primitive pr;
  pr.shape = Shape::Box;
  pr.box_min = lo;
  pr.box_max = hi;
  pr.density = density;
  pr.albedo = albedo;
  pr.tag = tag;
  return pr;
}

void AnalyticScene::validate() const {
  require(!primitives.empty(), "analytic scene: needs at least one primitive");
  for (const Primitive& p : primitives) {
    require(p.density > 0.0, "analytic scene: primitive density must be > 0");
    require(p.albedo.minCoeff() >= 0.0 && p.albedo.maxCoeff() <= 1.0,
            "analytic scene: albedo must lie in [0,1]");
    if (p.shape == Primitive::Shape::Sphere)
      require(p.radius > 0.0, "analytic scene: sphere radius must be > 0");
    else
      require((p.box_max - p.box_min).minCoeff() > 0.0,
              "analytic scene: box must have positive extent");
  }
}

Vec3 AnalyticScene::centroid() const {
  Vec3 c = Vec3::Zero();
  for (const Primitive& p : primitives)
    c += p.shape == Primitive::Shape::Sphere ? p.center
                                             : Vec3(0.5 * (p.box_min + p.box_max));
  return c / static_cast<double>(primitives.size());
}

void AnalyticScene::bounds(Vec3* lo, Vec3* hi) const {
  *lo = Vec3::Constant(std::numeric_limits<double>::max());
  *hi = Vec3::Constant(std::numeric_limits<double>::lowest());
  for (const Primitive& p : primitives) {
    Vec3 pl = p.shape == Primitive::Shape::Sphere ? Vec3(p.center - Vec3::Constant(p.radius))
                                                  : p.box_min;
    Vec3 ph = p.shape == Primitive::Shape::Sphere ? Vec3(p.center + Vec3::Constant(p.radius))
                                                  : p.box_max;
    *lo = lo->cwiseMin(pl);
    *hi = hi->cwiseMax(ph);
  }
}

bool AnalyticScene::in_subset(const Primitive& p, SceneSubset subset) const {
  if (subset == SceneSubset::All) return true;
  return (subset == SceneSubset::Foreground) == (p.tag == PrimitiveTag::Foreground);
}

AnalyticSample analytic_eval(const AnalyticScene& scene, const Vec3& p,
                             SceneSubset subset) {
  return analytic_eval_dir(scene, p, Vec3::Zero(), subset);
}

AnalyticSample analytic_eval_dir(const AnalyticScene& scene, const Vec3& p,
                                 const Vec3& direction, SceneSubset subset) {
  AnalyticSample out;
  Vec3 weighted = Vec3::Zero();
  for (const Primitive& pr : scene.primitives) {
    if (!scene.in_subset(pr, subset) || !pr.contains(p)) continue;
    Vec3 albedo = pr.albedo;
    if (pr.tint_strength != 0.0 && direction.squaredNorm() > 0.0) {
      double s = 1.0 + pr.tint_strength * direction.dot(pr.tint_direction);
      albedo = (albedo * s).cwiseMax(0.0).cwiseMin(1.0);
    }
    out.density += pr.density;
    weighted += pr.density * albedo;
  }
  if (out.density > 0.0) out.color = weighted / out.density;
  return out;
}

FieldOutput AnalyticField::eval(const Vec3& p, const Vec3& d) const {
  AnalyticSample s = analytic_eval_dir(scene_, p, d, subset_);
  return FieldOutput{s.color, s.density};
}

RenderResult oracle_render(const AnalyticScene& scene, SceneSubset subset,
                           const ViewSpec& view, const OracleRenderConfig& config) {
  scene.validate();
  view.intrinsics.validate();
  require(config.march_steps >= 1 && config.supersample >= 1,
          "oracle_render: march steps and supersample must be >= 1");
  const int W = view.intrinsics.width, H = view.intrinsics.height;
  const int S = config.supersample;
  RenderResult r;
  r.color = Image(W, H, 3);
  r.depth = Image(W, H, 1);
  r.disparity = Image(W, H, 1);
  r.opacity = Image(W, H, 1);

  const double dt = (view.t_far - view.t_near) / config.march_steps;
  parallel_for(static_cast<int64_t>(W) * H, config.threads,
               [&](int64_t b, int64_t e, int) {
                 for (int64_t k = b; k < e; ++k) {
                   int row = static_cast<int>(k / W), col = static_cast<int>(k % W);
                   Vec3 color = Vec3::Zero();
                   double sum_w = 0.0, sum_wt = 0.0;
                   for (int sy = 0; sy < S; ++sy)
                     for (int sx = 0; sx < S; ++sx) {
                       double rr = row + (sy + 0.5) / S - 0.5;
                       double cc = col + (sx + 0.5) / S - 0.5;
                       Ray ray = ray_through(view.intrinsics, view.pose, rr, cc,
                                             view.t_near, view.t_far);
                       double trans = 1.0;
                       for (int m = 0; m < config.march_steps; ++m) {
                         double t = view.t_near + (m + 0.5) * dt;
                         AnalyticSample s = analytic_eval_dir(scene, ray.at(t),
                                                              ray.direction, subset);
                         if (s.density <= 0.0) continue;
                         double a = 1.0 - std::exp(-s.density * dt);
                         double w = a * trans;
                         color += w * s.color;
                         sum_w += w;
                         sum_wt += w * t;
                         trans *= 1.0 - a;
                         if (trans < 1e-7) break;
                       }
                     }
                   double inv = 1.0 / (S * S);
                   r.color.set_rgb(row, col, color * inv);
                   sum_w *= inv;
                   sum_wt *= inv;
                   r.opacity.at(row, col) = sum_w;
                   r.depth.at(row, col) = sum_wt / (sum_w + 1e-10);
                   r.disparity.at(row, col) = (sum_w + 1e-10) / (sum_wt + 1e-10);
                 }
               });
  return r;
}

AnalyticScene transform_scene_foreground(const AnalyticScene& scene,
                                         const SimilarityTransform& T) {
  T.validate();
  AnalyticScene out = scene;
  for (Primitive& p : out.primitives) {
    if (p.tag != PrimitiveTag::Foreground) continue;
    if (p.shape == Primitive::Shape::Sphere) {
      p.center = T.apply(p.center);
      p.radius *= T.scale;
    } else {
      bool rotated = (T.rotation - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-12;
      require(!rotated, "transform_scene_foreground: boxes support translation/scale only");
      p.box_min = T.apply(p.box_min);
      p.box_max = T.apply(p.box_max);
    }
  }
  return out;
}

AnalyticScene make_scene_preset(const std::string& name) {
  AnalyticScene scene;
  if (name == "default" || name == "disjoint") {
    scene.primitives.push_back(Primitive::box(Vec3(-1.7, -1.35, -0.65), Vec3(1.7, 1.35, -0.35),
                                              24.0, Vec3(0.30, 0.33, 0.38),
                                              PrimitiveTag::Background));
    scene.primitives.push_back(Primitive::sphere(Vec3(0.0, 0.0, 0.55), 0.22, 30.0,
                                                 Vec3(0.82, 0.30, 0.24),
                                                 PrimitiveTag::Foreground));
  } else if (name == "camo") {
    scene.primitives.push_back(Primitive::box(Vec3(-1.7, -1.35, -0.65), Vec3(1.7, 1.35, -0.35),
                                              24.0, Vec3(0.62, 0.66, 0.72),
                                              PrimitiveTag::Background));
    scene.primitives.push_back(Primitive::sphere(Vec3(0.0, 0.0, 0.55), 0.42, 30.0,
                                                 Vec3(0.10, 0.12, 0.15),
                                                 PrimitiveTag::Foreground));
  } else {
    throw InputError("unknown scene preset '" + name + "' (expected default|camo)");
  }
  return scene;
}

ViewSpec arc_view(const AnalyticScene& scene, const ArcSpec& arc, int index,
                  int width, int height, double t_near, double t_far) {
  require(arc.n_views >= 2, "arc: need at least two views");
  require(arc.distance > 0.0 && arc.arc_degrees >= 0.0,
          "arc: degenerate arc (distance must be > 0, span >= 0)");
  require(index >= 0 && index < arc.n_views, "arc: view index out of range");

  Vec3 target = scene.centroid();
  double span = arc.arc_degrees * M_PI / 180.0;
  double theta = arc.n_views > 1
                     ? -0.5 * span + span * index / (arc.n_views - 1)
                     : 0.0;
  double phi = arc.elevation_degrees * M_PI / 180.0 *
               std::sin(2.0 * M_PI * index / arc.n_views);
  Vec3 dir(std::sin(theta) * std::cos(phi), std::sin(phi),
           std::cos(theta) * std::cos(phi));
  Vec3 pos = target + arc.distance * dir;

  Vec3 z = (pos - target).normalized();
  Vec3 up = Vec3::UnitY();
  Vec3 x = up.cross(z).normalized();
  Vec3 y = z.cross(x);

  ViewSpec view;
  view.intrinsics = CameraIntrinsics::centered(width, height, arc.focal_scale * width);
  view.pose.rotation.col(0) = x;
  view.pose.rotation.col(1) = y;
  view.pose.rotation.col(2) = z;
  view.pose.translation = pos;
  view.pose.validate();
  view.t_near = t_near;
  view.t_far = t_far;
  return view;
}

void arc_t_range(const AnalyticScene& scene, const ArcSpec& arc,
                 double* t_near, double* t_far) {
  Vec3 lo, hi;
  scene.bounds(&lo, &hi);
  Vec3 target = scene.centroid();
  double content_radius = std::max((lo - target).norm(), (hi - target).norm());
  *t_near = std::max(0.05, arc.distance - content_radius * 1.15);
  *t_far = arc.distance + content_radius * 1.15;
}

}  // namespace voldis
