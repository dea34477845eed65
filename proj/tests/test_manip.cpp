// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#include "voldis/manip.hpp"

#include "voldis/voxel_field.hpp"

#include <doctest.h>

using namespace voldis;

namespace {

struct OraclePair {
  AnalyticScene scene;
  std::unique_ptr<AnalyticField> full;
  std::unique_ptr<AnalyticField> bg;
};

OraclePair oracle_fields(const std::string& preset) {
  OraclePair p;
  p.scene = make_scene_preset(preset);
  p.full = std::make_unique<AnalyticField>(p.scene, SceneSubset::All);
  p.bg = std::make_unique<AnalyticField>(p.scene, SceneSubset::Background);
  return p;
}

GeneratedDataset small_dataset(const std::string& preset, int views, int res) {
  GenerateConfig cfg;
  cfg.scene = make_scene_preset(preset);
  cfg.arc.n_views = views;
  cfg.width = res;
  cfg.height = res;
  cfg.oracle.march_steps = 128;
  cfg.oracle.supersample = 1;
  return generate_dataset(cfg);
}

VoxelGridConfig override_voxel(double init_color = 0.5) {
  VoxelGridConfig c;
  c.nx = c.ny = c.nz = 24;
  c.bbox_min = Vec3(-1.9, -1.5, -0.85);
  c.bbox_max = Vec3(1.9, 1.5, 1.1);
  c.init_color = init_color;
  return c;
}

ManipConfig quick_manip(int64_t iterations) {
  ManipConfig mc;
  mc.iterations = iterations;
  mc.rays_per_batch = 256;
  mc.n_samples = 64;
  mc.lr_start = 0.05;
  mc.lr_end = 0.01;
  mc.checkpoint_every = 100;
  mc.threads = 2;
  return mc;
}

}  // namespace

TEST_CASE("object removal is exactly the background render") {
  OraclePair p = oracle_fields("default");
  FieldPair bg_pair;
  bg_pair.coarse = p.bg->clone();

  ArcSpec arc;
  double tn, tf;
  arc_t_range(p.scene, arc, &tn, &tf);
  ViewSpec view = arc_view(p.scene, arc, 3, 24, 24, tn, tf);
  RenderOptions opts;
  opts.sampling.n_coarse = 48;
  opts.sampling.n_fine = 0;

  RenderResult removed = remove_object(bg_pair, view, opts);
  RenderResult direct = render_view(*p.bg, nullptr, view, opts);
  CHECK(removed.color.data == direct.color.data);
  CHECK(removed.depth.data == direct.depth.data);
}

TEST_CASE("removal of the foreground matches the oracle background render") {
  OraclePair p = oracle_fields("default");
  FieldPair bg_pair;
  bg_pair.coarse = p.bg->clone();
  ArcSpec arc;
  double tn, tf;
  arc_t_range(p.scene, arc, &tn, &tf);
  ViewSpec view = arc_view(p.scene, arc, 6, 48, 48, tn, tf);

  RenderOptions opts;
  opts.sampling.n_coarse = 128;
  opts.sampling.n_fine = 0;
  RenderResult removed = remove_object(bg_pair, view, opts);

  OracleRenderConfig oc;
  oc.march_steps = 512;
  oc.supersample = 1;
  RenderResult oracle = oracle_render(p.scene, SceneSubset::Background, view, oc);
  CHECK(psnr(export_color(removed.color), export_color(oracle.color)) >= 25.0);
}

TEST_CASE("camouflage with an empty foreground starts at zero loss and is a no-op") {
  // bg == full: every foreground difference vanishes, so the objective is
  // zero at initialization and the optimizer has nothing to move.
  OraclePair p = oracle_fields("default");
  GeneratedDataset gen = small_dataset("default", 2, 12);

  VoxelGridField override_field(override_voxel());
  std::vector<double> before(override_field.params().begin(), override_field.params().end());
  ManipConfig mc = quick_manip(5);
  ManipResult result = camouflage(*p.bg, *p.bg, gen.dataset, override_field, mc);
  CHECK(result.trace.front().loss == 0.0);
  CHECK(result.trace.back().loss == 0.0);
  std::vector<double> after(override_field.params().begin(), override_field.params().end());
  CHECK(before == after);
}

TEST_CASE("identity transform equals the unmodified composite") {
  OraclePair p = oracle_fields("default");
  ArcSpec arc;
  double tn, tf;
  arc_t_range(p.scene, arc, &tn, &tf);
  ViewSpec view = arc_view(p.scene, arc, 9, 24, 24, tn, tf);
  RenderOptions opts;
  opts.sampling.n_coarse = 32;
  opts.sampling.n_fine = 32;

  TransformSpec spec;  // identity
  RenderResult transformed = transform_foreground(*p.full, *p.bg, view, spec, opts);
  DisentangledViews dv = render_disentangled(*p.full, nullptr, *p.bg, view, opts);
  for (size_t i = 0; i < transformed.color.data.size(); ++i)
    CHECK(std::abs(transformed.color.data[i] - dv.composite.color.data[i]) <= 1e-6);
}

TEST_CASE("foreground translation matches the inverse camera translation") {
  // View-independent scene with only the foreground object: the composite
  // then is the foreground term alone.
  AnalyticScene scene;
  scene.primitives.push_back(Primitive::sphere(Vec3(0, 0, 0.3), 0.3, 30.0,
                                               Vec3(0.8, 0.3, 0.2),
                                               PrimitiveTag::Foreground));
  AnalyticField full(scene, SceneSubset::All);
  AnalyticField bg(scene, SceneSubset::Background);

  ViewSpec view;
  view.intrinsics = CameraIntrinsics::centered(32, 32, 28.0);
  view.pose.translation = Vec3(0, 0, 2.8);
  view.t_near = 1.2;
  view.t_far = 4.4;

  RenderOptions opts;
  opts.sampling.n_coarse = 96;
  opts.sampling.n_fine = 0;

  Vec3 t(0.25, -0.1, 0.0);
  TransformSpec spec;
  spec.world = SimilarityTransform::translate(t);
  RenderResult moved = transform_foreground(full, bg, view, spec, opts);

  ViewSpec shifted = view;
  shifted.pose.translation -= t;
  DisentangledViews reference = render_disentangled(full, nullptr, bg, shifted, opts);

  double mean_abs = 0.0;
  for (size_t i = 0; i < moved.color.data.size(); ++i)
    mean_abs += std::abs(moved.color.data[i] - reference.composite.color.data[i]);
  mean_abs /= static_cast<double>(moved.color.data.size());
  CHECK(mean_abs <= 0.02);
}

TEST_CASE("doubling the focal doubles the projected foreground extent") {
  AnalyticScene scene;
  scene.primitives.push_back(Primitive::sphere(Vec3(0, 0, 0.3), 0.28, 30.0,
                                               Vec3(0.8, 0.3, 0.2),
                                               PrimitiveTag::Foreground));
  AnalyticField full(scene, SceneSubset::All);
  AnalyticField bg(scene, SceneSubset::Background);

  ViewSpec view;
  view.intrinsics = CameraIntrinsics::centered(128, 128, 100.0);
  view.pose.translation = Vec3(0, 0, 2.8);
  view.t_near = 1.2;
  view.t_far = 4.4;
  RenderOptions opts;
  opts.sampling.n_coarse = 128;
  opts.sampling.n_fine = 0;

  auto bbox_width = [&](const RenderResult& r) {
    int cmin = r.opacity.width, cmax = -1;
    for (int row = 0; row < r.opacity.height; ++row)
      for (int col = 0; col < r.opacity.width; ++col)
        if (r.opacity.at(row, col) > 0.5) {
          cmin = std::min(cmin, col);
          cmax = std::max(cmax, col);
        }
    return cmax - cmin + 1;
  };

  TransformSpec unit;
  RenderResult base = transform_foreground(full, bg, view, unit, opts);
  TransformSpec zoom;
  zoom.focal_scale = 2.0;
  RenderResult doubled = transform_foreground(full, bg, view, zoom, opts);

  double ratio = static_cast<double>(bbox_width(doubled)) / bbox_width(base);
  CHECK(ratio == doctest::Approx(2.0).epsilon(0.10));
}

TEST_CASE("camouflage drives the masked region toward the background") {
  OraclePair p = oracle_fields("camo");
  GeneratedDataset gen = small_dataset("camo", 3, 24);

  VoxelGridField override_field(override_voxel());
  ManipConfig mc = quick_manip(150);
  ManipResult result = camouflage(*p.full, *p.bg, gen.dataset, override_field, mc);

  REQUIRE(!result.per_view_final.empty());
  REQUIRE(!result.trace.empty());
  CHECK(result.trace.back().loss < result.trace.front().loss);
  for (double v : result.per_view_final) CHECK(v < 0.01);
}

TEST_CASE("camouflage leaves every weight-derived map bitwise unchanged") {
  OraclePair p = oracle_fields("camo");
  GeneratedDataset gen = small_dataset("camo", 2, 16);

  VoxelGridField override_field(override_voxel());
  ManipConfig mc = quick_manip(40);
  camouflage(*p.full, *p.bg, gen.dataset, override_field, mc);

  ViewSpec view = gen.dataset.view_spec(0);
  RenderResult before = render_with_override(*p.full, *p.bg, nullptr, view, 64, 2);
  RenderResult after = render_with_override(*p.full, *p.bg, &override_field, view, 64, 2);
  CHECK(before.depth.data == after.depth.data);
  CHECK(before.disparity.data == after.disparity.data);
  CHECK(before.opacity.data == after.opacity.data);
  CHECK(before.color.data != after.color.data);
}

TEST_CASE("nonnegative inpainting: residual pixels stay nonnegative, objective drops") {
  OraclePair p = oracle_fields("camo");
  GeneratedDataset gen = small_dataset("camo", 3, 20);

  VoxelGridConfig rc = override_voxel(0.05);
  VoxelGridField residual(rc);
  ManipConfig mc = quick_manip(250);
  ManipResult result = nonnegative_inpaint(*p.full, *p.bg, gen.dataset, residual, mc);

  CHECK(result.final_probe < result.initial_probe);
  CHECK(result.final_probe <= 0.2 * result.initial_probe);

  RenderOptions ropts;
  ropts.sampling.n_coarse = 64;
  ropts.sampling.n_fine = 0;
  for (int v = 0; v < 3; ++v) {
    RenderResult r = render_view(residual, nullptr, gen.dataset.view_spec(v), ropts);
    for (double px : r.color.data) CHECK(px >= 0.0);
  }
}

TEST_CASE("nonnegative inpainting with identical volumes starts at the optimum") {
  OraclePair p = oracle_fields("default");
  GeneratedDataset gen = small_dataset("default", 2, 12);
  VoxelGridConfig rc = override_voxel(0.05);
  rc.init_density = 0.01;
  VoxelGridField residual(rc);
  ManipConfig mc = quick_manip(30);
  // full == bg: the zero residual is optimal and the fit must not regress it.
  ManipResult result = nonnegative_inpaint(*p.bg, *p.bg, gen.dataset, residual, mc);
  CHECK(result.final_probe <= result.initial_probe + 1e-9);
}

TEST_CASE("semantic manipulation recolors the mask and nothing else") {
  OraclePair p = oracle_fields("camo");
  GeneratedDataset gen = small_dataset("camo", 2, 24);

  VoxelGridField override_field(override_voxel(0.3));
  auto scorer = SoftHistogramScorer::from_color_name("red");
  SemanticConfig sc;
  sc.prep.grid = 16;
  sc.prep.input = 24;
  sc.render_width = 24;
  sc.render_height = 24;
  sc.view_block = 4;
  ManipConfig mc = quick_manip(60);
  mc.lr_start = 0.1;
  mc.lr_end = 0.02;

  ManipResult result = semantic_manipulate(*p.full, *p.bg, gen.dataset, *scorer,
                                           override_field, sc, mc);
  CHECK(result.final_probe >= result.initial_probe);
  REQUIRE(!result.trace.empty());
  CHECK(result.trace.back().loss <= result.trace.front().loss);

  // Outside the mask the composite must match the background render.
  ViewSpec view = gen.dataset.view_spec(0);
  RenderResult edited = render_with_override(*p.full, *p.bg, &override_field, view, 64, 2);
  RenderOptions ropts;
  ropts.sampling.n_coarse = 64;
  ropts.sampling.n_fine = 0;
  RenderResult bg_only = render_view(*p.bg, nullptr, view, ropts);
  const Image& mask = gen.dataset.views[0].mask;
  for (int r = 0; r < 24; ++r)
    for (int c = 0; c < 24; ++c) {
      if (mask.at(r, c) == 1.0) continue;
      Vec3 d = edited.color.rgb(r, c) - bg_only.color.rgb(r, c);
      CHECK(d.cwiseAbs().maxCoeff() <= 1e-3);
    }
}

namespace {

// A scorer with no opinion: similarity is constant, gradient zero. With it,
// only the background pixel constraint steers the optimization.
class ConstantScorer final : public SemanticScorer {
 public:
  double similarity(const Image& image, Image* grad) const override {
    if (grad) *grad = Image(image.width, image.height, 3);
    return 0.5;
  }
  std::string describe() const override { return "constant"; }
};

}  // namespace

TEST_CASE("a constant scorer leaves only the background pixel term active") {
  OraclePair p = oracle_fields("camo");
  GeneratedDataset gen = small_dataset("camo", 2, 16);

  VoxelGridField override_field(override_voxel(0.4));
  ConstantScorer scorer;
  SemanticConfig sc;
  sc.prep.grid = 8;
  sc.prep.input = 12;
  sc.render_width = 16;
  sc.render_height = 16;
  sc.view_block = 2;
  ManipConfig mc = quick_manip(20);

  ManipResult result = semantic_manipulate(*p.full, *p.bg, gen.dataset, scorer,
                                           override_field, sc, mc);
  for (const ManipMetricsRow& row : result.trace)
    CHECK(row.aux == 0.5);  // the similarity never moves
  CHECK(result.trace.back().loss <= result.trace.front().loss);
}

TEST_CASE("novel-view masks threshold the foreground opacity") {
  Image opacity(4, 4, 1, 0.0);
  opacity.at(1, 2) = 0.06;
  opacity.at(2, 2) = 0.4;
  opacity.at(3, 3) = 0.05;  // exactly tau: excluded
  Image mask = view_mask_from_opacity(opacity, 0.05);
  CHECK(mask.at(1, 2) == 1.0);
  CHECK(mask.at(2, 2) == 1.0);
  CHECK(mask.at(3, 3) == 0.0);
  CHECK(mask.at(0, 0) == 0.0);
}
