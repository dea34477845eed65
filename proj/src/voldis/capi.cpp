// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#include "voldis/voldis.h"

#include "voldis/field_io.hpp"
#include "voldis/manip.hpp"
#include "voldis/report.hpp"
#include "voldis/runconfig.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

thread_local std::string g_last_error;

vd_status fail(vd_status code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

template <typename Fn>
vd_status guarded(Fn&& fn) {
  try {
    fn();
    return VD_OK;
  } catch (const voldis::NumericError& e) {
    return fail(VD_ERR_NUMERIC, e.what());
  } catch (const voldis::InputError& e) {
    return fail(VD_ERR_INPUT, e.what());
  } catch (const voldis::IoError& e) {
    return fail(VD_ERR_INPUT, e.what());
  } catch (const std::exception& e) {
    return fail(VD_ERR_INPUT, e.what());
  }
}

json parse_config(const char* config_json) {
  json user = json::object();
  if (config_json && config_json[0] != '\0') {
    try {
      user = json::parse(config_json);
    } catch (const json::exception& e) {
      throw voldis::InputError(std::string("config: malformed JSON: ") + e.what());
    }
  }
  return voldis::resolve_run_config(json::object(), user);
}

std::string view_stem(int i) {
  std::ostringstream s;
  s << "view_" << std::setw(4) << std::setfill('0') << i;
  return s.str();
}

std::vector<int> resolve_views(const voldis::PosedDataset& ds, int view_index) {
  if (view_index >= 0) {
    voldis::require(view_index < static_cast<int>(ds.views.size()),
                    "view index out of range");
    return {view_index};
  }
  std::vector<int> all(ds.views.size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  return all;
}

std::ofstream open_metrics(const std::string& run_dir, const char* header) {
  fs::create_directories(run_dir);
  std::ofstream csv(fs::path(run_dir) / "metrics.csv");
  if (!csv) throw voldis::IoError("cannot write metrics.csv in " + run_dir);
  csv << header << "\n";
  return csv;
}

}  // namespace

struct vd_dataset {
  voldis::PosedDataset data;
};

struct vd_fields {
  voldis::FieldPair pair;
};

extern "C" {

const char* vd_version(void) { return "0.1.0"; }

const char* vd_last_error(void) { return g_last_error.c_str(); }

vd_status vd_generate(const char* config_json, const char* out_dir) {
  return guarded([&] {
    json config = parse_config(config_json);
    voldis::GenerateConfig gc = voldis::generate_config_from(config);
    voldis::GeneratedDataset gen = voldis::generate_dataset(gc);
    voldis::save_generated(gen, out_dir);
    voldis::write_effective_config(config, out_dir);
  });
}

vd_status vd_dataset_open(const char* dir, vd_dataset** out) {
  return guarded([&] {
    auto handle = std::make_unique<vd_dataset>();
    handle->data = voldis::load_dataset(dir);
    *out = handle.release();
  });
}

void vd_dataset_close(vd_dataset* dataset) { delete dataset; }

int vd_dataset_view_count(const vd_dataset* dataset) {
  return dataset ? static_cast<int>(dataset->data.views.size()) : 0;
}

void vd_dataset_resolution(const vd_dataset* dataset, int* width, int* height) {
  if (!dataset) return;
  if (width) *width = dataset->data.width();
  if (height) *height = dataset->data.height();
}

vd_status vd_fields_create(const char* config_json, vd_fields** out) {
  return guarded([&] {
    json config = parse_config(config_json);
    auto handle = std::make_unique<vd_fields>();
    handle->pair = voldis::make_field_pair(config);
    *out = handle.release();
  });
}

vd_status vd_fields_open(const char* checkpoint_dir, vd_fields** out) {
  return guarded([&] {
    auto handle = std::make_unique<vd_fields>();
    handle->pair = voldis::FieldPair::load(checkpoint_dir);
    *out = handle.release();
  });
}

vd_status vd_fields_save(const vd_fields* fields, const char* checkpoint_dir) {
  return guarded([&] { fields->pair.save(checkpoint_dir); });
}

void vd_fields_close(vd_fields* fields) { delete fields; }

vd_status vd_fit(vd_fields* fields, const vd_dataset* dataset, const char* config_json,
                 const char* run_dir) {
  return guarded([&] {
    json config = parse_config(config_json);
    voldis::TrainConfig tc = voldis::train_config_from(config);
    voldis::LossKind loss = voldis::loss_kind_from(config);
    voldis::write_effective_config(config, run_dir);

    std::ofstream csv = open_metrics(run_dir, "iter,loss,lr,psnr");
    std::string ckpt_dir = (fs::path(run_dir) / "checkpoints").string();
    voldis::FitCallbacks callbacks;
    callbacks.on_metrics = [&](const voldis::MetricsRow& row) {
      csv << row.iteration << "," << row.loss << "," << row.lr << "," << row.psnr
          << "\n";
      csv.flush();
    };
    callbacks.on_checkpoint = [&](int64_t) { fields->pair.save(ckpt_dir); };

    voldis::fit_field(dataset->data, fields->pair, loss, tc, &callbacks);
    fields->pair.save(ckpt_dir);
  });
}

vd_status vd_render_view(const vd_fields* fields, const vd_dataset* dataset,
                         int view_index, const char* config_json, const char* out_dir,
                         double* out_psnr) {
  return guarded([&] {
    json config = parse_config(config_json);
    voldis::TrainConfig tc = voldis::train_config_from(config);
    voldis::require(view_index >= 0 &&
                        view_index < static_cast<int>(dataset->data.views.size()),
                    "render: pose index out of range");
    voldis::RenderResult r =
        voldis::render_dataset_view(fields->pair, dataset->data, view_index, tc);
    voldis::save_render(r, out_dir, view_stem(view_index));
    if (out_psnr)
      *out_psnr = voldis::psnr(voldis::export_color(r.color),
                               dataset->data.views[view_index].image);
  });
}

vd_status vd_extract(const vd_fields* full, const vd_fields* background,
                     const vd_dataset* dataset, const char* config_json,
                     int view_index, const char* out_dir) {
  return guarded([&] {
    json config = parse_config(config_json);
    voldis::RenderOptions opts;
    int samples = voldis::composite_samples_from(config);
    opts.sampling.n_coarse = samples / 2;
    opts.sampling.n_fine = samples - samples / 2;
    opts.sampling.jitter = false;
    opts.threads = voldis::settings_from(config).threads;
    voldis::CompositionVariant variant = voldis::composite_variant_from(config);

    for (int v : resolve_views(dataset->data, view_index)) {
      voldis::DisentangledViews dv = voldis::render_disentangled(
          full->pair.render_field(), full->pair.proposal(),
          background->pair.render_field(), dataset->data.view_spec(v), opts, variant);
      voldis::save_render(dv.foreground, (fs::path(out_dir) / "foreground").string(),
                          view_stem(v));
      voldis::save_render(dv.composite, (fs::path(out_dir) / "composite").string(),
                          view_stem(v));
    }
    voldis::write_effective_config(config, out_dir);
  });
}

vd_status vd_remove(const vd_fields* background, const vd_dataset* dataset,
                    const char* config_json, int view_index, const char* out_dir) {
  return guarded([&] {
    json config = parse_config(config_json);
    voldis::TrainConfig tc = voldis::train_config_from(config);
    voldis::RenderOptions opts;
    opts.sampling.n_coarse = tc.n_coarse;
    opts.sampling.n_fine = tc.use_fine ? tc.n_fine : 0;
    opts.sampling.jitter = false;
    opts.threads = tc.threads;
    for (int v : resolve_views(dataset->data, view_index)) {
      voldis::RenderResult r = voldis::remove_object(
          background->pair, dataset->data.view_spec(v), opts);
      voldis::save_render(r, out_dir, view_stem(v));
    }
    voldis::write_effective_config(config, out_dir);
  });
}

vd_status vd_transform(const vd_fields* full, const vd_fields* background,
                       const vd_dataset* dataset, const char* config_json,
                       int view_index, const char* out_dir) {
  return guarded([&] {
    json config = parse_config(config_json);
    voldis::TransformSpec spec = voldis::transform_spec_from(config);
    voldis::RenderOptions opts;
    int samples = voldis::composite_samples_from(config);
    opts.sampling.n_coarse = samples;
    opts.sampling.n_fine = 0;
    opts.sampling.jitter = false;
    opts.threads = voldis::settings_from(config).threads;
    voldis::CompositionVariant variant = voldis::composite_variant_from(config);

    for (int v : resolve_views(dataset->data, view_index)) {
      voldis::RenderResult r = voldis::transform_foreground(
          full->pair.render_field(), background->pair.render_field(),
          dataset->data.view_spec(v), spec, opts, variant);
      voldis::save_render(r, out_dir, view_stem(v));
    }
    voldis::write_effective_config(config, out_dir);
  });
}

vd_status vd_camouflage(const vd_fields* full, const vd_fields* background,
                        const vd_dataset* dataset, const char* config_json,
                        const char* run_dir) {
  return guarded([&] {
    json config = parse_config(config_json);
    voldis::ManipConfig mc = voldis::manip_config_from(config);
    voldis::write_effective_config(config, run_dir);
    voldis::FieldPair override_pair = voldis::make_field_pair(config);
    voldis::RadianceField& override_field = *override_pair.coarse;

    std::ofstream csv = open_metrics(run_dir, "iter,loss,lr,mse");
    voldis::ManipMetricsSink sink = [&](const voldis::ManipMetricsRow& row) {
      csv << row.iteration << "," << row.loss << "," << row.lr << "," << row.aux << "\n";
      csv.flush();
    };

    const voldis::RadianceField& f = full->pair.render_field();
    const voldis::RadianceField& b = background->pair.render_field();
    voldis::camouflage(f, b, dataset->data, override_field, mc, &sink);

    fs::create_directories(fs::path(run_dir) / "checkpoints");
    voldis::save_field(override_field, (fs::path(run_dir) / "checkpoints").string() +
                                           "/override.vdsf");
    for (int v : resolve_views(dataset->data, -1)) {
      voldis::RenderResult r = voldis::render_with_override(
          f, b, &override_field, dataset->data.view_spec(v), mc.n_samples, mc.threads);
      voldis::save_render(r, (fs::path(run_dir) / "renders").string(), view_stem(v));
    }
  });
}

vd_status vd_nonneg(const vd_fields* full, const vd_fields* background,
                    const vd_dataset* dataset, const char* config_json,
                    const char* run_dir) {
  return guarded([&] {
    json config = parse_config(config_json);
    voldis::ManipConfig mc = voldis::manip_config_from(config);
    voldis::write_effective_config(config, run_dir);
    voldis::FieldPair residual_pair = voldis::make_field_pair(config);
    voldis::RadianceField& residual = *residual_pair.coarse;

    std::ofstream csv = open_metrics(run_dir, "iter,loss,lr,objective");
    voldis::ManipMetricsSink sink = [&](const voldis::ManipMetricsRow& row) {
      csv << row.iteration << "," << row.loss << "," << row.lr << "," << row.aux << "\n";
      csv.flush();
    };

    const voldis::RadianceField& f = full->pair.render_field();
    const voldis::RadianceField& b = background->pair.render_field();
    voldis::nonnegative_inpaint(f, b, dataset->data, residual, mc, &sink);

    fs::create_directories(fs::path(run_dir) / "checkpoints");
    voldis::save_field(residual, (fs::path(run_dir) / "checkpoints").string() +
                                     "/residual.vdsf");
    voldis::RenderOptions ropts{{mc.n_samples, 0, false, 0}, mc.threads};
    for (int v : resolve_views(dataset->data, -1)) {
      voldis::ViewSpec vs = dataset->data.view_spec(v);
      voldis::RenderResult res = voldis::render_view(residual, nullptr, vs, ropts);
      voldis::save_render(res, (fs::path(run_dir) / "renders" / "residual").string(),
                          view_stem(v));
      voldis::RenderResult fullr = voldis::render_view(f, nullptr, vs, ropts);
      // Display composite: light can only be added; clip at 1 for export.
      fullr.color.data = [&] {
        std::vector<double> d = fullr.color.data;
        for (size_t i = 0; i < d.size(); ++i) d[i] += res.color.data[i];
        return d;
      }();
      voldis::save_render(fullr, (fs::path(run_dir) / "renders" / "composite").string(),
                          view_stem(v));
    }
  });
}

vd_status vd_semantic(const vd_fields* full, const vd_fields* background,
                      const vd_dataset* dataset, const char* target,
                      const char* config_json, const char* run_dir) {
  return guarded([&] {
    voldis::require(target != nullptr && target[0] != '\0',
                    "semantic: target must be a color name or an image path");
    json config = parse_config(config_json);
    voldis::ManipConfig mc = voldis::manip_config_from(config);
    voldis::SemanticConfig sc = voldis::semantic_config_from(config);
    voldis::write_effective_config(config, run_dir);

    std::unique_ptr<voldis::SemanticScorer> scorer;
    if (fs::exists(target)) {
      scorer = voldis::SoftHistogramScorer::from_image(voldis::read_png(target));
    } else {
      scorer = voldis::SoftHistogramScorer::from_color_name(target);
    }

    voldis::FieldPair override_pair = voldis::make_field_pair(config);
    voldis::RadianceField& override_field = *override_pair.coarse;

    std::ofstream csv = open_metrics(run_dir, "iter,loss,lr,sim");
    voldis::ManipMetricsSink sink = [&](const voldis::ManipMetricsRow& row) {
      csv << row.iteration << "," << row.loss << "," << row.lr << "," << row.aux << "\n";
      csv.flush();
    };

    const voldis::RadianceField& f = full->pair.render_field();
    const voldis::RadianceField& b = background->pair.render_field();
    voldis::semantic_manipulate(f, b, dataset->data, *scorer, override_field, sc, mc,
                                &sink);

    fs::create_directories(fs::path(run_dir) / "checkpoints");
    voldis::save_field(override_field, (fs::path(run_dir) / "checkpoints").string() +
                                           "/override.vdsf");
    for (int v : resolve_views(dataset->data, -1)) {
      voldis::RenderResult r = voldis::render_with_override(
          f, b, &override_field, dataset->data.view_spec(v), mc.n_samples, mc.threads);
      voldis::save_render(r, (fs::path(run_dir) / "renders").string(), view_stem(v));
    }
  });
}

vd_status vd_report(const char* run_dir) {
  return guarded([&] { voldis::write_report(run_dir); });
}

}  // extern "C"
