// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#include "voldis/runconfig.hpp"

#include "voldis/mlp_field.hpp"
#include "voldis/voxel_field.hpp"

#include <filesystem>
#include <fstream>

using nlohmann::json;

namespace voldis {

json default_run_config() {
  return json{
      {"seed", 0},
      {"threads", 0},
      {"deterministic", true},
      {"field",
       {{"kind", "voxel"},
        {"resolution", {64, 64, 64}},
        {"bbox_min", {-1.9, -1.5, -0.85}},
        {"bbox_max", {1.9, 1.5, 1.1}},
        {"init_density", 0.1},
        {"init_color", 0.05},
        {"mlp",
         {{"hidden_layers", 4},
          {"width", 128},
          {"color_width", 64},
          {"pos_features", 128},
          {"pos_sigma", 10.0},
          {"dir_features", 16},
          {"dir_sigma", 4.0},
          {"view_dependent", true}}}}},
      {"train",
       {{"target", "full"},
        {"iterations", 20000},
        {"rays_per_batch", 1024},
        {"n_coarse", 64},
        {"n_fine", 64},
        {"lr_start", 5e-4},
        {"lr_end", 5e-5},
        {"beta1", 0.9},
        {"beta2", 0.999},
        {"epsilon", 1e-8},
        {"checkpoint_every", 500},
        {"holdout_view", -1},
        {"mask_dilation", 0},
        {"use_fine", true},
        {"jitter", true}}},
      {"render", {{"resolution", {504, 378}}, {"n_coarse", 64}, {"n_fine", 64}}},
      {"composite", {{"samples", 128}, {"variant", "c1"}}},
      {"transform",
       {{"translate", {0.0, 0.0, 0.0}},
        {"rotate_axis", {0.0, 1.0, 0.0}},
        {"rotate_degrees", 0.0},
        {"scale", 1.0},
        {"focal_scale", 1.0},
        {"occlusion_transfer", true},
        {"precedence_threshold", 1e-3}}},
      {"manip",
       {{"iterations", 2000},
        {"rays_per_batch", 1024},
        {"n_samples", 128},
        {"lr_start", 5e-4},
        {"lr_end", 5e-5},
        {"checkpoint_every", 500}}},
      {"semantic",
       {{"resolution", {252, 189}},
        {"clip_grid", 128},
        {"clip_input", 224},
        {"target", "red"},
        {"target_weight", 1.0},
        {"bg_sim_weight", 1.0},
        {"bg_pixel_weight", 1.0},
        {"opacity_mask_threshold", 0.05},
        {"view_block", 8}}},
      {"generate",
       {{"scene", "default"},
        {"views", 20},
        {"resolution", {64, 64}},
        {"distance", 2.8},
        {"arc_degrees", 36.0},
        {"elevation_degrees", 6.0},
        {"focal_scale", 0.97},
        {"march_steps", 512},
        {"supersample", 2},
        {"mask_threshold", 0.5},
        {"primitives", nullptr}}},
  };
}

namespace {

void merge_checked(json& base, const json& user, const std::string& path) {
  if (!user.is_object()) {
    base = user;
    return;
  }
  for (auto it = user.begin(); it != user.end(); ++it) {
    if (!base.contains(it.key()))
      throw InputError("config: unknown key '" + path + it.key() + "'");
    json& slot = base[it.key()];
    if (slot.is_object() && it.value().is_object())
      merge_checked(slot, it.value(), path + it.key() + ".");
    else
      slot = it.value();
  }
}

Vec3 vec3_from(const json& j) {
  require(j.is_array() && j.size() == 3, "config: expected a 3-vector");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

}  // namespace

json resolve_run_config(const json& file_config, const json& overrides) {
  json config = default_run_config();
  merge_checked(config, file_config, "");
  merge_checked(config, overrides, "");
  return config;
}

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("config: cannot open config file: " + path);
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw InputError("config: malformed JSON in " + path + ": " + e.what());
  }
}

RunSettings settings_from(const json& config) {
  RunSettings s;
  s.seed = config.at("seed").get<uint64_t>();
  s.threads = config.at("threads").get<int>();
  s.deterministic = config.at("deterministic").get<bool>();
  return s;
}

TrainConfig train_config_from(const json& config) {
  const json& t = config.at("train");
  RunSettings s = settings_from(config);
  TrainConfig tc;
  tc.iterations = t.at("iterations").get<int64_t>();
  tc.rays_per_batch = t.at("rays_per_batch").get<int>();
  tc.n_coarse = t.at("n_coarse").get<int>();
  tc.n_fine = t.at("n_fine").get<int>();
  tc.lr_start = t.at("lr_start").get<double>();
  tc.lr_end = t.at("lr_end").get<double>();
  tc.adam.beta1 = t.at("beta1").get<double>();
  tc.adam.beta2 = t.at("beta2").get<double>();
  tc.adam.epsilon = t.at("epsilon").get<double>();
  tc.checkpoint_every = t.at("checkpoint_every").get<int64_t>();
  tc.holdout_view = t.at("holdout_view").get<int>();
  tc.mask_dilation = t.at("mask_dilation").get<int>();
  tc.use_fine = t.at("use_fine").get<bool>();
  tc.jitter = t.at("jitter").get<bool>();
  tc.seed = s.seed;
  tc.deterministic = s.deterministic;
  tc.threads = s.threads;
  tc.validate();
  return tc;
}

LossKind loss_kind_from(const json& config) {
  std::string target = config.at("train").at("target").get<std::string>();
  if (target == "full") return LossKind::Full;
  if (target == "background") return LossKind::MaskedBackground;
  throw InputError("config: train.target must be 'full' or 'background', got '" +
                   target + "'");
}

ManipConfig manip_config_from(const json& config) {
  const json& m = config.at("manip");
  RunSettings s = settings_from(config);
  ManipConfig mc;
  mc.iterations = m.at("iterations").get<int64_t>();
  mc.rays_per_batch = m.at("rays_per_batch").get<int>();
  mc.n_samples = m.at("n_samples").get<int>();
  mc.lr_start = m.at("lr_start").get<double>();
  mc.lr_end = m.at("lr_end").get<double>();
  mc.adam.beta1 = config.at("train").at("beta1").get<double>();
  mc.adam.beta2 = config.at("train").at("beta2").get<double>();
  mc.adam.epsilon = config.at("train").at("epsilon").get<double>();
  mc.checkpoint_every = m.at("checkpoint_every").get<int64_t>();
  mc.seed = s.seed;
  mc.threads = s.threads;
  mc.validate();
  return mc;
}

SemanticConfig semantic_config_from(const json& config) {
  const json& s = config.at("semantic");
  SemanticConfig sc;
  sc.prep.grid = s.at("clip_grid").get<int>();
  sc.prep.input = s.at("clip_input").get<int>();
  sc.target_weight = s.at("target_weight").get<double>();
  sc.bg_sim_weight = s.at("bg_sim_weight").get<double>();
  sc.bg_pixel_weight = s.at("bg_pixel_weight").get<double>();
  sc.opacity_mask_threshold = s.at("opacity_mask_threshold").get<double>();
  sc.render_width = s.at("resolution").at(0).get<int>();
  sc.render_height = s.at("resolution").at(1).get<int>();
  sc.view_block = s.at("view_block").get<int>();
  return sc;
}

GenerateConfig generate_config_from(const json& config) {
  const json& g = config.at("generate");
  GenerateConfig gc;
  if (g.at("primitives").is_null()) {
    gc.scene = make_scene_preset(g.at("scene").get<std::string>());
  } else {
    for (const json& p : g.at("primitives")) {
      Primitive pr;
      std::string shape = p.at("shape").get<std::string>();
      PrimitiveTag tag = p.at("tag").get<std::string>() == "foreground"
                             ? PrimitiveTag::Foreground
                             : PrimitiveTag::Background;
      if (shape == "sphere") {
        pr = Primitive::sphere(vec3_from(p.at("center")), p.at("radius").get<double>(),
                               p.at("density").get<double>(), vec3_from(p.at("albedo")), tag);
      } else if (shape == "box") {
        pr = Primitive::box(vec3_from(p.at("min")), vec3_from(p.at("max")),
                            p.at("density").get<double>(), vec3_from(p.at("albedo")), tag);
      } else {
        throw InputError("config: primitive shape must be sphere or box");
      }
      if (p.contains("tint_strength")) {
        pr.tint_strength = p.at("tint_strength").get<double>();
        if (p.contains("tint_direction")) pr.tint_direction = vec3_from(p.at("tint_direction"));
      }
      gc.scene.primitives.push_back(pr);
    }
  }
  gc.arc.n_views = g.at("views").get<int>();
  gc.arc.distance = g.at("distance").get<double>();
  gc.arc.arc_degrees = g.at("arc_degrees").get<double>();
  gc.arc.elevation_degrees = g.at("elevation_degrees").get<double>();
  gc.arc.focal_scale = g.at("focal_scale").get<double>();
  gc.width = g.at("resolution").at(0).get<int>();
  gc.height = g.at("resolution").at(1).get<int>();
  gc.oracle.march_steps = g.at("march_steps").get<int>();
  gc.oracle.supersample = g.at("supersample").get<int>();
  gc.oracle.threads = config.at("threads").get<int>();
  gc.mask_threshold = g.at("mask_threshold").get<double>();
  gc.seed = config.at("seed").get<uint64_t>();
  return gc;
}

TransformSpec transform_spec_from(const json& config) {
  const json& t = config.at("transform");
  TransformSpec spec;
  SimilarityTransform world;
  world.scale = t.at("scale").get<double>();
  double degrees = t.at("rotate_degrees").get<double>();
  if (degrees != 0.0)
    world.rotation = SimilarityTransform::rotate(vec3_from(t.at("rotate_axis")), degrees).rotation;
  world.translation = vec3_from(t.at("translate"));
  world.validate();
  spec.world = world;
  spec.focal_scale = t.at("focal_scale").get<double>();
  spec.occlusion_transfer = t.at("occlusion_transfer").get<bool>();
  spec.precedence_threshold = t.at("precedence_threshold").get<double>();
  return spec;
}

FieldPair make_field_pair(const json& config) {
  const json& f = config.at("field");
  RunSettings s = settings_from(config);
  std::string kind = f.at("kind").get<std::string>();
  bool use_fine = config.at("train").at("use_fine").get<bool>();

  FieldPair pair;
  if (kind == "voxel") {
    VoxelGridConfig vc;
    vc.nx = f.at("resolution").at(0).get<int>();
    vc.ny = f.at("resolution").at(1).get<int>();
    vc.nz = f.at("resolution").at(2).get<int>();
    vc.bbox_min = vec3_from(f.at("bbox_min"));
    vc.bbox_max = vec3_from(f.at("bbox_max"));
    vc.init_density = f.at("init_density").get<double>();
    vc.init_color = f.at("init_color").get<double>();
    pair.coarse = std::make_unique<VoxelGridField>(vc);
    if (use_fine) pair.fine = std::make_unique<VoxelGridField>(vc);
  } else if (kind == "mlp") {
    const json& m = f.at("mlp");
    MlpConfig mc;
    mc.hidden_layers = m.at("hidden_layers").get<int>();
    mc.width = m.at("width").get<int>();
    mc.color_width = m.at("color_width").get<int>();
    mc.pos_features = m.at("pos_features").get<int>();
    mc.pos_sigma = m.at("pos_sigma").get<double>();
    mc.dir_features = m.at("dir_features").get<int>();
    mc.dir_sigma = m.at("dir_sigma").get<double>();
    mc.view_dependent = m.at("view_dependent").get<bool>();
    mc.init_density = f.at("init_density").get<double>();
    mc.seed = hash_combine(s.seed, 10);
    pair.coarse = std::make_unique<MlpField>(mc);
    if (use_fine) {
      mc.seed = hash_combine(s.seed, 11);
      pair.fine = std::make_unique<MlpField>(mc);
    }
  } else {
    throw InputError("config: field.kind must be 'voxel' or 'mlp', got '" + kind + "'");
  }
  return pair;
}

int composite_samples_from(const json& config) {
  return config.at("composite").at("samples").get<int>();
}

CompositionVariant composite_variant_from(const json& config) {
  return composition_variant_from_string(
      config.at("composite").at("variant").get<std::string>());
}

void write_effective_config(const json& config, const std::string& run_dir) {
  std::filesystem::create_directories(run_dir);
  std::ofstream out(std::filesystem::path(run_dir) / "config.json");
  if (!out) throw IoError("config: cannot write effective config in " + run_dir);
  out << config.dump(2) << "\n";
}

}  // namespace voldis
