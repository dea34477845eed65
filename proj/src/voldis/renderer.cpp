// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#include "voldis/renderer.hpp"

#include "voldis/threading.hpp"

#include <filesystem>

namespace voldis {

RaySamples aligned_samples(const Ray& ray, const RadianceField* proposal,
                           const SamplingConfig& config, uint64_t ray_id) {
  RaySamples coarse = sample_stratified(ray, config.n_coarse, config.jitter,
                                        config.seed, ray_id);
  if (!proposal || config.n_fine <= 0) {
    if (config.n_fine <= 0) return coarse;
    // No proposal: spend the fine budget on a denser stratified grid.
    return sample_stratified(ray, config.n_coarse + config.n_fine, config.jitter,
                             config.seed, ray_id);
  }
  std::vector<double> densities(coarse.size());
  std::vector<Vec3> dirs;  // proposal densities ignore direction gradients here
  for (size_t i = 0; i < coarse.size(); ++i)
    densities[i] = proposal->eval(coarse.position(ray, i), ray.direction).density;
  CompositeWeights cw = compositing_weights(densities, coarse.delta);
  return sample_importance(ray, cw, coarse, config.n_fine, config.jitter,
                           config.seed, ray_id);
}

RayProfile eval_ray_profile(const RadianceField& field, const Ray& ray,
                            const RaySamples& samples) {
  RayProfile p;
  p.samples = samples;
  size_t n = samples.size();
  p.colors.resize(n);
  p.densities.resize(n);
  for (size_t i = 0; i < n; ++i) {
    FieldOutput out = field.eval(samples.position(ray, i), ray.direction);
    p.colors[i] = out.color;
    p.densities[i] = out.density;
  }
  p.cw = compositing_weights(p.densities, samples.delta);
  return p;
}

ForegroundSamples extract_foreground(const RayProfile& full, const RayProfile& bg) {
  if (full.samples.size() != bg.samples.size())
    throw AlignmentError("extract_foreground: sample counts differ");
  ForegroundSamples fg;
  size_t n = full.samples.size();
  fg.weights.resize(n);
  fg.colors.resize(n);
  for (size_t i = 0; i < n; ++i) {
    if (std::abs(full.samples.t[i] - bg.samples.t[i]) > 1e-12)
      throw AlignmentError("extract_foreground: sample positions differ");
    fg.weights[i] = full.cw.weight[i] - bg.cw.weight[i];
    fg.colors[i] = full.colors[i] - bg.colors[i];
  }
  return fg;
}

CompositionVariant composition_variant_from_string(const std::string& name) {
  if (name == "c1") return CompositionVariant::C1;
  if (name == "c2") return CompositionVariant::C2;
  if (name == "c3") return CompositionVariant::C3;
  if (name == "c4") return CompositionVariant::C4;
  throw InputError("unknown composition variant '" + name + "' (expected c1..c4)");
}

CompositePixel composite_pixel(const RayProfile& bg, const ForegroundSamples& fg,
                               CompositionVariant variant,
                               const SampleModifier* bg_modifier,
                               const SampleModifier* fg_modifier,
                               std::span<const double> full_weights,
                               std::span<const Vec3> full_colors) {
  size_t n = bg.samples.size();
  if (fg.size() != n)
    throw AlignmentError("composite_pixel: foreground/background sample counts differ");
  if (!full_weights.empty() && (full_weights.size() != n || full_colors.size() != n))
    throw AlignmentError("composite_pixel: full-volume sample counts differ");

  CompositePixel out;
  out.combined_weights.assign(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    double wb = bg.cw.weight[i];
    Vec3 cb = bg.colors[i];
    if (bg_modifier) (*bg_modifier)(i, wb, cb);
    double wf = fg.weights[i];
    Vec3 cf = fg.colors[i];
    if (fg_modifier) (*fg_modifier)(i, wf, cf);
    double w_full = full_weights.empty() ? wb + wf : full_weights[i];
    Vec3 c_full = full_colors.empty() ? Vec3(cb + cf) : full_colors[i];

    switch (variant) {
      case CompositionVariant::C1:
        out.color += wb * cb + wf * cf;
        out.combined_weights[i] = wb + wf;
        break;
      case CompositionVariant::C2:  // full color in place of the difference
        out.color += wb * cb + wf * c_full;
        out.combined_weights[i] = wb + wf;
        break;
      case CompositionVariant::C3:  // full weight in place of the difference
        out.color += wb * cb + w_full * cf;
        out.combined_weights[i] = wb + w_full;
        break;
      case CompositionVariant::C4:  // single product of the sums
        out.color += (wb + wf) * (cb + cf);
        out.combined_weights[i] = wb + wf;
        break;
    }
  }
  return out;
}

namespace {

void store_pixel(RenderResult& r, int row, int col, const Vec3& color,
                 std::span<const double> weights, std::span<const double> t) {
  r.color.set_rgb(row, col, color);
  DepthResult d = expected_depth(weights, t);
  r.depth.at(row, col) = d.depth;
  r.disparity.at(row, col) = d.disparity;
  double acc = 0.0;
  for (double w : weights) acc += w;
  r.opacity.at(row, col) = acc;
}

RenderResult make_result(int w, int h) {
  RenderResult r;
  r.color = Image(w, h, 3);
  r.depth = Image(w, h, 1);
  r.disparity = Image(w, h, 1);
  r.opacity = Image(w, h, 1);
  return r;
}

}  // namespace

RenderResult render_view(const RadianceField& field, const RadianceField* proposal,
                         const ViewSpec& view, const RenderOptions& opts) {
  view.intrinsics.validate();
  const int W = view.intrinsics.width, H = view.intrinsics.height;
  RenderResult r = make_result(W, H);
  const RadianceField* prop = proposal ? proposal : &field;

  parallel_for(static_cast<int64_t>(W) * H, opts.threads,
               [&](int64_t b, int64_t e, int) {
                 for (int64_t k = b; k < e; ++k) {
                   int row = static_cast<int>(k / W), col = static_cast<int>(k % W);
                   Ray ray = ray_through(view.intrinsics, view.pose, row, col,
                                         view.t_near, view.t_far);
                   RaySamples s = aligned_samples(ray, prop, opts.sampling,
                                                  static_cast<uint64_t>(k));
                   RayProfile p = eval_ray_profile(field, ray, s);
                   Vec3 color = composite(p.cw.weight, p.colors);
                   store_pixel(r, row, col, color, p.cw.weight, s.t);
                 }
               });
  return r;
}

DisentangledViews render_disentangled(const RadianceField& full,
                                      const RadianceField* full_proposal,
                                      const RadianceField& background,
                                      const ViewSpec& view, const RenderOptions& opts,
                                      CompositionVariant variant,
                                      const SampleModifier* bg_modifier,
                                      const SampleModifier* fg_modifier) {
  view.intrinsics.validate();
  const int W = view.intrinsics.width, H = view.intrinsics.height;
  DisentangledViews out;
  out.foreground = make_result(W, H);
  out.composite = make_result(W, H);
  const RadianceField* prop = full_proposal ? full_proposal : &full;

  parallel_for(static_cast<int64_t>(W) * H, opts.threads,
               [&](int64_t b, int64_t e, int) {
                 std::vector<double> pos_w;
                 for (int64_t k = b; k < e; ++k) {
                   int row = static_cast<int>(k / W), col = static_cast<int>(k % W);
                   Ray ray = ray_through(view.intrinsics, view.pose, row, col,
                                         view.t_near, view.t_far);
                   RaySamples s = aligned_samples(ray, prop, opts.sampling,
                                                  static_cast<uint64_t>(k));
                   RayProfile pf = eval_ray_profile(full, ray, s);
                   RayProfile pb = eval_ray_profile(background, ray, s);
                   ForegroundSamples fg = extract_foreground(pf, pb);

                   Vec3 fg_color = composite(fg.weights, fg.colors);
                   // Depth and mask maps come from the positive part; the
                   // signed negative weights describe background removal,
                   // not foreground geometry.
                   pos_w.assign(fg.weights.begin(), fg.weights.end());
                   for (double& w : pos_w) w = std::max(w, 0.0);
                   store_pixel(out.foreground, row, col, fg_color, pos_w, s.t);

                   CompositePixel cp = composite_pixel(pb, fg, variant,
                                                       bg_modifier, fg_modifier);
                   store_pixel(out.composite, row, col, cp.color,
                               cp.combined_weights, s.t);
                 }
               });
  return out;
}

Image export_color(const Image& color) {
  Image out = color;
  for (double& v : out.data) v = clamp01(v);
  return out;
}

void save_render(const RenderResult& r, const std::string& dir, const std::string& stem) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  write_png((fs::path(dir) / (stem + ".png")).string(), export_color(r.color));
  write_pfm((fs::path(dir) / (stem + "_depth.pfm")).string(), r.depth);
  write_pfm((fs::path(dir) / (stem + "_disparity.pfm")).string(), r.disparity);
  write_pfm((fs::path(dir) / (stem + "_opacity.pfm")).string(), r.opacity);
}

}  // namespace voldis
