// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0
//
// Command-line driver for the voldis engine. Parses flags into a config
// override document and calls through the C API. Precedence: built-in
// defaults < --config file < flags. Exit codes: 0 success, 1 input error,
// 2 numerical abort.

#include <voldis/voldis.h>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonArgs {
  std::string config_path;
  json overrides = json::object();
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON config file");
  auto set = [&args](const std::string& pointer) {
    return [&args, pointer](const std::string& value) {
      json parsed;
      try {
        parsed = json::parse(value);
      } catch (const json::exception&) {
        parsed = value;  // plain string
      }
      args.overrides[json::json_pointer(pointer)] = parsed;
    };
  };
  cmd->add_option_function<std::string>("--seed", set("/seed"), "RNG seed (default 0)");
  cmd->add_option_function<std::string>("--threads", set("/threads"),
                                        "worker cap (0 = all cores)");
  cmd->add_flag_callback(
      "--deterministic",
      [&args] { args.overrides[json::json_pointer("/deterministic")] = true; },
      "force ordered reductions (default on)");
}

// Builds the effective config string: file config with flag overrides merged.
std::string effective_config(const CommonArgs& args) {
  json file_config = json::object();
  if (!args.config_path.empty()) {
    std::ifstream in(args.config_path);
    if (!in) throw CLI::ValidationError("--config", "cannot open " + args.config_path);
    try {
      in >> file_config;
    } catch (const json::exception& e) {
      throw CLI::ValidationError("--config", std::string("malformed JSON: ") + e.what());
    }
  }
  file_config.merge_patch(args.overrides);
  return file_config.dump();
}

uint64_t announced_seed(const CommonArgs& args) {
  json merged = json::object();
  if (!args.config_path.empty()) {
    std::ifstream in(args.config_path);
    if (in) {
      try {
        in >> merged;
      } catch (...) {
      }
    }
  }
  merged.merge_patch(args.overrides);
  if (merged.contains("seed") && merged["seed"].is_number())
    return merged["seed"].get<uint64_t>();
  return 0;
}

int run_status(vd_status status) {
  if (status != VD_OK) std::cerr << "error: " << vd_last_error() << "\n";
  return static_cast<int>(status);
}

struct DatasetHandle {
  vd_dataset* ptr = nullptr;
  ~DatasetHandle() { vd_dataset_close(ptr); }
};
struct FieldsHandle {
  vd_fields* ptr = nullptr;
  ~FieldsHandle() { vd_fields_close(ptr); }
};

// Accepts a run directory (with checkpoints/) or a checkpoint directory.
std::string checkpoint_dir(const std::string& path) {
  if (fs::exists(fs::path(path) / "checkpoints" / "coarse.vdsf"))
    return (fs::path(path) / "checkpoints").string();
  return path;
}

// Option helper for "--key x,y,z" vectors into a config pointer.
void add_vec_option(CLI::App* cmd, const std::string& flag, CommonArgs& args,
                    const std::string& pointer, size_t n, const std::string& help) {
  cmd->add_option_function<std::vector<double>>(
         flag,
         [&args, pointer, n, flag](const std::vector<double>& v) {
           if (v.size() != n)
             throw CLI::ValidationError(flag, "expected " + std::to_string(n) + " values");
           args.overrides[json::json_pointer(pointer)] = v;
         },
         help)
      ->delimiter(',');
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"voldis: volumetric foreground/background disentanglement engine"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::simple);

  // ---- generate ----
  CommonArgs g_args;
  std::string g_out;
  auto* gen = app.add_subcommand("generate", "synthesize a posed dataset from an analytic scene");
  add_common(gen, g_args);
  gen->add_option("--out", g_out, "output dataset directory")->required();
  gen->add_option_function<std::string>(
      "--scene",
      [&g_args](const std::string& v) {
        g_args.overrides[json::json_pointer("/generate/scene")] = v;
      },
      "scene preset (default|camo)");
  for (auto [flag, ptr] : std::initializer_list<std::pair<const char*, const char*>>{
           {"--views", "/generate/views"},
           {"--march-steps", "/generate/march_steps"},
           {"--supersample", "/generate/supersample"}})
    gen->add_option_function<int>(
        flag, [&g_args, p = std::string(ptr)](int v) {
          g_args.overrides[json::json_pointer(p)] = v;
        });
  for (auto [flag, ptr] : std::initializer_list<std::pair<const char*, const char*>>{
           {"--distance", "/generate/distance"},
           {"--arc-degrees", "/generate/arc_degrees"},
           {"--elevation-degrees", "/generate/elevation_degrees"},
           {"--focal-scale", "/generate/focal_scale"},
           {"--mask-threshold", "/generate/mask_threshold"}})
    gen->add_option_function<double>(
        flag, [&g_args, p = std::string(ptr)](double v) {
          g_args.overrides[json::json_pointer(p)] = v;
        });
  add_vec_option(gen, "--resolution", g_args, "/generate/resolution", 2, "W,H");

  // ---- fit ----
  CommonArgs f_args;
  std::string f_data, f_out;
  auto* fit = app.add_subcommand("fit", "fit the full or background field to a dataset");
  add_common(fit, f_args);
  fit->add_option("--data", f_data, "dataset directory")->required();
  fit->add_option("--out", f_out, "run directory")->required();
  fit->add_option_function<std::string>(
      "--target",
      [&f_args](const std::string& v) {
        f_args.overrides[json::json_pointer("/train/target")] = v;
      },
      "full | background");
  fit->add_option_function<std::string>(
      "--field",
      [&f_args](const std::string& v) {
        f_args.overrides[json::json_pointer("/field/kind")] = v;
      },
      "voxel | mlp");
  for (auto [flag, ptr] : std::initializer_list<std::pair<const char*, const char*>>{
           {"--iterations", "/train/iterations"},
           {"--rays", "/train/rays_per_batch"},
           {"--n-coarse", "/train/n_coarse"},
           {"--n-fine", "/train/n_fine"},
           {"--checkpoint-every", "/train/checkpoint_every"},
           {"--holdout", "/train/holdout_view"},
           {"--mask-dilation", "/train/mask_dilation"}})
    fit->add_option_function<int>(
        flag, [&f_args, p = std::string(ptr)](int v) {
          f_args.overrides[json::json_pointer(p)] = v;
        });
  for (auto [flag, ptr] : std::initializer_list<std::pair<const char*, const char*>>{
           {"--lr-start", "/train/lr_start"},
           {"--lr-end", "/train/lr_end"},
           {"--init-color", "/field/init_color"},
           {"--init-density", "/field/init_density"}})
    fit->add_option_function<double>(
        flag, [&f_args, p = std::string(ptr)](double v) {
          f_args.overrides[json::json_pointer(p)] = v;
        });
  fit->add_flag_callback(
      "--no-fine",
      [&f_args] { f_args.overrides[json::json_pointer("/train/use_fine")] = false; },
      "train a single field without the fine pass");
  add_vec_option(fit, "--field-resolution", f_args, "/field/resolution", 3, "nx,ny,nz");
  add_vec_option(fit, "--bbox-min", f_args, "/field/bbox_min", 3, "x,y,z");
  add_vec_option(fit, "--bbox-max", f_args, "/field/bbox_max", 3, "x,y,z");

  // ---- extract ----
  CommonArgs x_args;
  std::string x_full, x_bg, x_data, x_out;
  int x_view = -1;
  auto* extract = app.add_subcommand("extract", "foreground extraction and recombination");
  add_common(extract, x_args);
  extract->add_option("--full", x_full, "full-scene run/checkpoint dir")->required();
  extract->add_option("--bg", x_bg, "background run/checkpoint dir")->required();
  extract->add_option("--data", x_data, "dataset directory")->required();
  extract->add_option("--out", x_out, "output directory")->required();
  extract->add_option("--view-index", x_view, "single view (-1 = all)");
  extract->add_option_function<int>("--samples", [&x_args](int v) {
    x_args.overrides[json::json_pointer("/composite/samples")] = v;
  });
  extract->add_option_function<std::string>("--variant", [&x_args](const std::string& v) {
    x_args.overrides[json::json_pointer("/composite/variant")] = v;
  });

  // ---- render ----
  CommonArgs r_args;
  std::string r_ckpt, r_data, r_out;
  int r_pose = 0;
  auto* render = app.add_subcommand("render", "render a training view from a checkpoint");
  add_common(render, r_args);
  render->add_option("--checkpoint", r_ckpt, "run/checkpoint dir")->required();
  render->add_option("--data", r_data, "dataset directory")->required();
  render->add_option("--pose-index", r_pose, "dataset view index")->required();
  render->add_option("--out", r_out, "output directory");

  // ---- remove ----
  CommonArgs rm_args;
  std::string rm_bg, rm_data, rm_out;
  int rm_view = -1;
  auto* remove = app.add_subcommand("remove", "render the background volume in isolation");
  add_common(remove, rm_args);
  remove->add_option("--bg", rm_bg, "background run/checkpoint dir")->required();
  remove->add_option("--data", rm_data, "dataset directory")->required();
  remove->add_option("--out", rm_out, "output directory")->required();
  remove->add_option("--view-index", rm_view, "single view (-1 = all)");

  // ---- transform ----
  CommonArgs t_args;
  std::string t_full, t_bg, t_data, t_out;
  int t_view = -1;
  auto* transform = app.add_subcommand("transform", "similarity-transform the foreground");
  add_common(transform, t_args);
  transform->add_option("--full", t_full)->required();
  transform->add_option("--bg", t_bg)->required();
  transform->add_option("--data", t_data)->required();
  transform->add_option("--out", t_out)->required();
  transform->add_option("--view-index", t_view, "single view (-1 = all)");
  add_vec_option(transform, "--translate", t_args, "/transform/translate", 3, "x,y,z");
  add_vec_option(transform, "--rotate-axis", t_args, "/transform/rotate_axis", 3, "x,y,z");
  for (auto [flag, ptr] : std::initializer_list<std::pair<const char*, const char*>>{
           {"--rotate-degrees", "/transform/rotate_degrees"},
           {"--scale", "/transform/scale"},
           {"--focal-scale", "/transform/focal_scale"}})
    transform->add_option_function<double>(
        flag, [&t_args, p = std::string(ptr)](double v) {
          t_args.overrides[json::json_pointer(p)] = v;
        });
  transform->add_flag_callback("--no-occlusion-transfer", [&t_args] {
    t_args.overrides[json::json_pointer("/transform/occlusion_transfer")] = false;
  });
  transform->add_option_function<int>("--samples", [&t_args](int v) {
    t_args.overrides[json::json_pointer("/composite/samples")] = v;
  });
  transform->add_option_function<std::string>("--variant", [&t_args](const std::string& v) {
    t_args.overrides[json::json_pointer("/composite/variant")] = v;
  });

  // ---- fitted manipulations ----
  auto add_manip_flags = [&](CLI::App* cmd, CommonArgs& args) {
    for (auto [flag, ptr] : std::initializer_list<std::pair<const char*, const char*>>{
             {"--iterations", "/manip/iterations"},
             {"--rays", "/manip/rays_per_batch"},
             {"--samples", "/manip/n_samples"},
             {"--checkpoint-every", "/manip/checkpoint_every"}})
      cmd->add_option_function<int>(
          flag, [&args, p = std::string(ptr)](int v) {
            args.overrides[json::json_pointer(p)] = v;
          });
    for (auto [flag, ptr] : std::initializer_list<std::pair<const char*, const char*>>{
             {"--lr-start", "/manip/lr_start"},
             {"--lr-end", "/manip/lr_end"},
             {"--init-color", "/field/init_color"}})
      cmd->add_option_function<double>(
          flag, [&args, p = std::string(ptr)](double v) {
            args.overrides[json::json_pointer(p)] = v;
          });
  };

  CommonArgs c_args;
  std::string c_full, c_bg, c_data, c_out;
  auto* camo = app.add_subcommand("camouflage", "re-texture the foreground to match the background");
  add_common(camo, c_args);
  camo->add_option("--full", c_full)->required();
  camo->add_option("--bg", c_bg)->required();
  camo->add_option("--data", c_data)->required();
  camo->add_option("--out", c_out)->required();
  add_manip_flags(camo, c_args);

  CommonArgs n_args;
  std::string n_full, n_bg, n_data, n_out;
  auto* nonneg = app.add_subcommand("nonneg", "non-negative residual inpainting");
  add_common(nonneg, n_args);
  nonneg->add_option("--full", n_full)->required();
  nonneg->add_option("--bg", n_bg)->required();
  nonneg->add_option("--data", n_data)->required();
  nonneg->add_option("--out", n_out)->required();
  add_manip_flags(nonneg, n_args);

  CommonArgs s_args;
  std::string s_full, s_bg, s_data, s_out, s_target;
  auto* semantic = app.add_subcommand("semantic", "masked semantic manipulation via the scorer");
  add_common(semantic, s_args);
  semantic->add_option("--full", s_full)->required();
  semantic->add_option("--bg", s_bg)->required();
  semantic->add_option("--data", s_data)->required();
  semantic->add_option("--out", s_out)->required();
  semantic->add_option("--target", s_target, "color name or reference image path")->required();
  add_manip_flags(semantic, s_args);
  add_vec_option(semantic, "--sem-resolution", s_args, "/semantic/resolution", 2, "W,H");
  for (auto [flag, ptr] : std::initializer_list<std::pair<const char*, const char*>>{
           {"--clip-grid", "/semantic/clip_grid"},
           {"--clip-input", "/semantic/clip_input"},
           {"--view-block", "/semantic/view_block"}})
    semantic->add_option_function<int>(
        flag, [&s_args, p = std::string(ptr)](int v) {
          s_args.overrides[json::json_pointer(p)] = v;
        });

  // ---- report ----
  std::string rep_run;
  auto* report = app.add_subcommand("report", "summarize a run's metrics CSV");
  report->add_option("--run", rep_run, "run directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      std::cout << "seed: " << announced_seed(g_args) << "\n";
      return run_status(vd_generate(effective_config(g_args).c_str(), g_out.c_str()));
    }
    if (fit->parsed()) {
      std::cout << "seed: " << announced_seed(f_args) << "\n";
      std::string config = effective_config(f_args);
      DatasetHandle data;
      if (auto s = vd_dataset_open(f_data.c_str(), &data.ptr)) return run_status(s);
      FieldsHandle fields;
      if (auto s = vd_fields_create(config.c_str(), &fields.ptr)) return run_status(s);
      return run_status(vd_fit(fields.ptr, data.ptr, config.c_str(), f_out.c_str()));
    }
    if (extract->parsed()) {
      std::cout << "seed: " << announced_seed(x_args) << "\n";
      std::string config = effective_config(x_args);
      DatasetHandle data;
      if (auto s = vd_dataset_open(x_data.c_str(), &data.ptr)) return run_status(s);
      FieldsHandle full, bg;
      if (auto s = vd_fields_open(checkpoint_dir(x_full).c_str(), &full.ptr))
        return run_status(s);
      if (auto s = vd_fields_open(checkpoint_dir(x_bg).c_str(), &bg.ptr))
        return run_status(s);
      return run_status(vd_extract(full.ptr, bg.ptr, data.ptr, config.c_str(), x_view,
                                   x_out.c_str()));
    }
    if (render->parsed()) {
      std::cout << "seed: " << announced_seed(r_args) << "\n";
      std::string config = effective_config(r_args);
      DatasetHandle data;
      if (auto s = vd_dataset_open(r_data.c_str(), &data.ptr)) return run_status(s);
      FieldsHandle fields;
      if (auto s = vd_fields_open(checkpoint_dir(r_ckpt).c_str(), &fields.ptr))
        return run_status(s);
      std::string out = r_out.empty() ? (fs::path(r_ckpt) / "renders").string() : r_out;
      double psnr_value = 0.0;
      vd_status s = vd_render_view(fields.ptr, data.ptr, r_pose, config.c_str(),
                                   out.c_str(), &psnr_value);
      if (s == VD_OK) std::cout << "psnr: " << psnr_value << "\n";
      return run_status(s);
    }
    if (remove->parsed()) {
      std::cout << "seed: " << announced_seed(rm_args) << "\n";
      std::string config = effective_config(rm_args);
      DatasetHandle data;
      if (auto s = vd_dataset_open(rm_data.c_str(), &data.ptr)) return run_status(s);
      FieldsHandle bg;
      if (auto s = vd_fields_open(checkpoint_dir(rm_bg).c_str(), &bg.ptr))
        return run_status(s);
      return run_status(vd_remove(bg.ptr, data.ptr, config.c_str(), rm_view,
                                  rm_out.c_str()));
    }
    if (transform->parsed()) {
      std::cout << "seed: " << announced_seed(t_args) << "\n";
      std::string config = effective_config(t_args);
      DatasetHandle data;
      if (auto s = vd_dataset_open(t_data.c_str(), &data.ptr)) return run_status(s);
      FieldsHandle full, bg;
      if (auto s = vd_fields_open(checkpoint_dir(t_full).c_str(), &full.ptr))
        return run_status(s);
      if (auto s = vd_fields_open(checkpoint_dir(t_bg).c_str(), &bg.ptr))
        return run_status(s);
      return run_status(vd_transform(full.ptr, bg.ptr, data.ptr, config.c_str(), t_view,
                                     t_out.c_str()));
    }
    auto run_manip = [&](const std::string& full_dir, const std::string& bg_dir,
                         const std::string& data_dir, const std::string& out_dir,
                         CommonArgs& args, auto&& call) -> int {
      std::cout << "seed: " << announced_seed(args) << "\n";
      std::string config = effective_config(args);
      DatasetHandle data;
      if (auto s = vd_dataset_open(data_dir.c_str(), &data.ptr)) return run_status(s);
      FieldsHandle full, bg;
      if (auto s = vd_fields_open(checkpoint_dir(full_dir).c_str(), &full.ptr))
        return run_status(s);
      if (auto s = vd_fields_open(checkpoint_dir(bg_dir).c_str(), &bg.ptr))
        return run_status(s);
      return run_status(call(full.ptr, bg.ptr, data.ptr, config, out_dir));
    };
    if (camo->parsed())
      return run_manip(c_full, c_bg, c_data, c_out, c_args,
                       [](vd_fields* f, vd_fields* b, vd_dataset* d,
                          const std::string& cfg, const std::string& out) {
                         return vd_camouflage(f, b, d, cfg.c_str(), out.c_str());
                       });
    if (nonneg->parsed())
      return run_manip(n_full, n_bg, n_data, n_out, n_args,
                       [](vd_fields* f, vd_fields* b, vd_dataset* d,
                          const std::string& cfg, const std::string& out) {
                         return vd_nonneg(f, b, d, cfg.c_str(), out.c_str());
                       });
    if (semantic->parsed())
      return run_manip(s_full, s_bg, s_data, s_out, s_args,
                       [&s_target](vd_fields* f, vd_fields* b, vd_dataset* d,
                                   const std::string& cfg, const std::string& out) {
                         return vd_semantic(f, b, d, s_target.c_str(), cfg.c_str(),
                                            out.c_str());
                       });
    if (report->parsed()) return run_status(vd_report(rep_run.c_str()));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
