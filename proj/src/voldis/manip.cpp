// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#include "voldis/manip.hpp"

#include "voldis/losses.hpp"
#include "voldis/threading.hpp"

#include <algorithm>

namespace voldis {

RenderResult remove_object(const FieldPair& background, const ViewSpec& view,
                           const RenderOptions& opts) {
  return render_view(background.render_field(), background.proposal(), view, opts);
}

void ManipConfig::validate() const {
  require(iterations >= 0 && rays_per_batch >= 1 && n_samples >= 2,
          "manip config: counts out of range");
  require(lr_start >= lr_end && lr_end > 0.0, "manip config: need lr_start >= lr_end > 0");
  require(checkpoint_every >= 1, "manip config: checkpoint_every must be >= 1");
}

FrozenRay freeze_ray(const RadianceField& full, const RadianceField& bg, const Ray& ray,
                     int n_samples) {
  FrozenRay fr;
  fr.samples = sample_stratified(ray, n_samples, false, 0, 0);
  RayProfile pf = eval_ray_profile(full, ray, fr.samples);
  fr.bg = eval_ray_profile(bg, ray, fr.samples);
  fr.fg = extract_foreground(pf, fr.bg);
  fr.bg_pixel = composite(fr.bg.cw.weight, fr.bg.colors);
  return fr;
}

CameraIntrinsics scale_intrinsics(const CameraIntrinsics& intr, int width, int height) {
  CameraIntrinsics out = intr;
  double sx = static_cast<double>(width) / intr.width;
  double sy = static_cast<double>(height) / intr.height;
  out.width = width;
  out.height = height;
  out.focal = intr.focal * sx;
  out.cx = (intr.cx + 0.5) * sx - 0.5;
  out.cy = (intr.cy + 0.5) * sy - 0.5;
  return out;
}

Image view_mask_from_opacity(const Image& fg_opacity, double tau) {
  Image mask(fg_opacity.width, fg_opacity.height, 1);
  for (size_t i = 0; i < fg_opacity.data.size(); ++i)
    mask.data[i] = fg_opacity.data[i] > tau ? 1.0 : 0.0;
  return mask;
}

// --------------------------------------------------------------------------
// Transformation

RenderResult transform_foreground(const RadianceField& full, const RadianceField& bg,
                                  const ViewSpec& view, const TransformSpec& spec,
                                  const RenderOptions& opts, CompositionVariant variant) {
  require(spec.focal_scale > 0.0, "transform: focal scale must be > 0");
  spec.world.validate();

  if (spec.is_identity() && variant == CompositionVariant::C1) {
    // Alias contract: identity transform is the unmodified composite.
    DisentangledViews v = render_disentangled(full, nullptr, bg, view, opts, variant);
    return v.composite;
  }

  SimilarityTransform inv = invert_similarity(spec.world);
  const int W = view.intrinsics.width, H = view.intrinsics.height;
  const int n = opts.sampling.n_coarse + opts.sampling.n_fine;
  CameraIntrinsics fg_intr = view.intrinsics;
  fg_intr.focal *= spec.focal_scale;

  RenderResult out;
  out.color = Image(W, H, 3);
  out.depth = Image(W, H, 1);
  out.disparity = Image(W, H, 1);
  out.opacity = Image(W, H, 1);

  parallel_for(static_cast<int64_t>(W) * H, opts.threads, [&](int64_t b, int64_t e, int) {
    std::vector<Vec3> warped_pos(n), warped_dir(n);
    std::vector<double> warped_delta(n), sig_full(n), sig_bg(n);
    std::vector<Vec3> col_full(n), col_bg(n);
    for (int64_t k = b; k < e; ++k) {
      int row = static_cast<int>(k / W), col = static_cast<int>(k % W);
      Ray ray = ray_through(view.intrinsics, view.pose, row, col, view.t_near, view.t_far);
      RaySamples samples = sample_stratified(ray, n, opts.sampling.jitter,
                                             opts.sampling.seed, static_cast<uint64_t>(k));
      RayProfile pb = eval_ray_profile(bg, ray, samples);

      // Foreground term along the warped ray: same t grid, positions mapped
      // through T^-1, metric deltas rescaled by the inverse scale.
      Ray fg_ray = spec.focal_scale != 1.0
                       ? ray_through(fg_intr, view.pose, row, col, view.t_near, view.t_far)
                       : ray;
      Vec3 dir_warped = inv.rotation * fg_ray.direction;
      for (int i = 0; i < n; ++i) {
        warped_pos[i] = inv.apply(fg_ray.at(samples.t[i]));
        warped_dir[i] = dir_warped;
        warped_delta[i] = samples.delta[i] * inv.scale;
      }
      for (int i = 0; i < n; ++i) {
        FieldOutput of = full.eval(warped_pos[i], warped_dir[i]);
        FieldOutput ob = bg.eval(warped_pos[i], warped_dir[i]);
        sig_full[i] = of.density;
        col_full[i] = of.color;
        sig_bg[i] = ob.density;
        col_bg[i] = ob.color;
      }
      CompositeWeights wf = compositing_weights(sig_full, warped_delta);
      CompositeWeights wb = compositing_weights(sig_bg, warped_delta);
      ForegroundSamples fg;
      fg.weights.resize(n);
      fg.colors.resize(n);
      for (int i = 0; i < n; ++i) {
        fg.weights[i] = wf.weight[i] - wb.weight[i];
        fg.colors[i] = col_full[i] - col_bg[i];
      }

      // Precedence of the transformed foreground over background samples.
      std::vector<double> bg_factor(n, 1.0);
      double cum = 0.0;
      for (int i = 0; i < n; ++i) {
        if (spec.occlusion_transfer) bg_factor[i] = std::max(0.0, 1.0 - cum);
        if (fg.weights[i] > spec.precedence_threshold) bg_factor[i] = 0.0;
        cum += std::max(fg.weights[i], 0.0);
      }
      SampleModifier bg_mod = [&](size_t i, double& w, Vec3&) { w *= bg_factor[i]; };

      CompositePixel cp = composite_pixel(pb, fg, variant, &bg_mod, nullptr,
                                          wf.weight, col_full);
      out.color.set_rgb(row, col, cp.color);
      DepthResult d = expected_depth(cp.combined_weights, samples.t);
      out.depth.at(row, col) = d.depth;
      out.disparity.at(row, col) = d.disparity;
      double acc = 0.0;
      for (double w : cp.combined_weights) acc += w;
      out.opacity.at(row, col) = acc;
    }
  });
  return out;
}

// --------------------------------------------------------------------------
// Shared pieces of the fitted manipulations

namespace {

struct GradAccumulator {
  std::vector<std::vector<double>> buffers;

  GradAccumulator(int threads, size_t n) : buffers(threads) {
    for (auto& b : buffers) b.resize(n);
  }
  void zero() {
    for (auto& b : buffers) std::fill(b.begin(), b.end(), 0.0);
  }
  // Ordered merge into buffer 0.
  std::span<double> merge() {
    for (size_t w = 1; w < buffers.size(); ++w)
      for (size_t i = 0; i < buffers[0].size(); ++i) buffers[0][i] += buffers[w][i];
    return buffers[0];
  }
};

struct BatchDraw {
  int view, row, col;
};

BatchDraw draw_pixel(uint64_t seed, uint64_t stream, int64_t iter, int j, int n_views,
                     int W, int H) {
  BatchDraw d;
  d.view = std::min(static_cast<int>(rng_uniform(seed, stream, iter, j) * n_views),
                    n_views - 1);
  d.row = std::min(static_cast<int>(rng_uniform(seed, stream + 1, iter, j) * H), H - 1);
  d.col = std::min(static_cast<int>(rng_uniform(seed, stream + 2, iter, j) * W), W - 1);
  return d;
}

}  // namespace

RenderResult render_with_override(const RadianceField& full, const RadianceField& bg,
                                  const RadianceField* override_field,
                                  const ViewSpec& view, int n_samples, int threads) {
  const int W = view.intrinsics.width, H = view.intrinsics.height;
  RenderResult out;
  out.color = Image(W, H, 3);
  out.depth = Image(W, H, 1);
  out.disparity = Image(W, H, 1);
  out.opacity = Image(W, H, 1);

  parallel_for(static_cast<int64_t>(W) * H, threads, [&](int64_t b, int64_t e, int) {
    for (int64_t k = b; k < e; ++k) {
      int row = static_cast<int>(k / W), col = static_cast<int>(k % W);
      Ray ray = ray_through(view.intrinsics, view.pose, row, col, view.t_near, view.t_far);
      FrozenRay fr = freeze_ray(full, bg, ray, n_samples);
      ForegroundSamples fg = fr.fg;
      if (override_field) {
        for (size_t i = 0; i < fg.size(); ++i)
          fg.colors[i] = override_field->eval(fr.samples.position(ray, i), ray.direction).color;
      }
      CompositePixel cp = composite_pixel(fr.bg, fg);
      out.color.set_rgb(row, col, cp.color);
      DepthResult d = expected_depth(cp.combined_weights, fr.samples.t);
      out.depth.at(row, col) = d.depth;
      out.disparity.at(row, col) = d.disparity;
      double acc = 0.0;
      for (double w : cp.combined_weights) acc += w;
      out.opacity.at(row, col) = acc;
    }
  });
  return out;
}

// --------------------------------------------------------------------------
// Camouflage (Eq. 7)

namespace {

// Mean squared error between composite and background render inside the mask.
double masked_region_mse(const RadianceField& full, const RadianceField& bg,
                         const RadianceField* override_field, const PosedDataset& dataset,
                         int view_index, const ManipConfig& config) {
  const PosedView& pv = dataset.views[view_index];
  ViewSpec vs = dataset.view_spec(view_index);
  RenderResult comp = render_with_override(full, bg, override_field, vs,
                                           config.n_samples, config.threads);
  RenderResult bg_only = render_view(bg, nullptr,
                                     vs, RenderOptions{{config.n_samples, 0, false, 0},
                                                       config.threads});
  double acc = 0.0;
  int64_t count = 0;
  for (int r = 0; r < pv.mask.height; ++r)
    for (int c = 0; c < pv.mask.width; ++c) {
      if (pv.mask.at(r, c) != 1.0) continue;
      Vec3 d = comp.color.rgb(r, c) - bg_only.color.rgb(r, c);
      acc += d.squaredNorm();
      count += 3;
    }
  return count > 0 ? acc / static_cast<double>(count) : 0.0;
}

}  // namespace

ManipResult camouflage(const RadianceField& full, const RadianceField& bg,
                       const PosedDataset& dataset, RadianceField& override_field,
                       const ManipConfig& config, const ManipMetricsSink* sink) {
  dataset.validate();
  config.validate();
  const int W = dataset.width(), H = dataset.height();
  const int n_views = static_cast<int>(dataset.views.size());
  const int threads = resolve_threads(config.threads);
  const int B = config.rays_per_batch;

  ManipResult result;
  auto mean_masked_mse = [&](const RadianceField* current) {
    double acc = 0.0;
    for (int v = 0; v < n_views; ++v)
      acc += masked_region_mse(full, bg, current, dataset, v, config);
    return acc / n_views;
  };
  result.initial_probe = mean_masked_mse(&override_field);

  AdamState adam(override_field.param_count());
  GradAccumulator grads(threads, override_field.param_count());
  std::vector<double> worker_loss(threads);

  for (int64_t k = 0; k < config.iterations; ++k) {
    grads.zero();
    std::fill(worker_loss.begin(), worker_loss.end(), 0.0);

    parallel_for(B, threads, [&](int64_t jb, int64_t je, int w) {
      std::vector<Vec3> pos, dirs;
      std::vector<FieldOutput> adj;
      for (int64_t j = jb; j < je; ++j) {
        BatchDraw d = draw_pixel(config.seed, 0xc01, k, static_cast<int>(j), n_views, W, H);
        const PosedView& pv = dataset.views[d.view];
        Ray ray = ray_through(pv.intrinsics, pv.pose, d.row, d.col,
                              dataset.t_near, dataset.t_far);
        FrozenRay fr = freeze_ray(full, bg, ray, config.n_samples);

        size_t n = fr.fg.size();
        pos.resize(n);
        dirs.resize(n);
        adj.resize(n);
        Vec3 residual = Vec3::Zero();  // x_c - x_bg = sum_i w_fg,i * c'_i
        for (size_t i = 0; i < n; ++i) {
          pos[i] = fr.samples.position(ray, i);
          dirs[i] = ray.direction;
          residual += fr.fg.weights[i] *
                      override_field.eval(pos[i], ray.direction).color;
        }
        worker_loss[w] += residual.squaredNorm();
        Vec3 pixel_adj = 2.0 * residual;
        for (size_t i = 0; i < n; ++i)
          adj[i] = FieldOutput{fr.fg.weights[i] * pixel_adj, 0.0};
        override_field.eval_backward(pos, dirs, adj, grads.buffers[w]);
      }
    });

    double loss = 0.0;
    for (double l : worker_loss) loss += l;
    if (!std::isfinite(loss))
      throw NumericError("camouflage: non-finite loss at iteration " + std::to_string(k));

    double lr = exp_decay_lr(config.lr_start, config.lr_end, k, config.iterations);
    adam_step(override_field.params(), grads.merge(), adam, lr, config.adam);

    if ((k + 1) % config.checkpoint_every == 0 || k + 1 == config.iterations) {
      ManipMetricsRow row{k + 1, loss, lr,
                          masked_region_mse(full, bg, &override_field, dataset,
                                            static_cast<int>((k / config.checkpoint_every) %
                                                             n_views),
                                            config)};
      result.trace.push_back(row);
      if (sink && *sink) (*sink)(row);
    }
  }

  result.per_view_final.resize(n_views);
  for (int v = 0; v < n_views; ++v)
    result.per_view_final[v] =
        masked_region_mse(full, bg, &override_field, dataset, v, config);
  result.final_probe = mean_masked_mse(&override_field);
  return result;
}

// --------------------------------------------------------------------------
// Non-negative inpainting (Eq. 8)

ManipResult nonnegative_inpaint(const RadianceField& full, const RadianceField& bg,
                                const PosedDataset& dataset, RadianceField& residual_field,
                                const ManipConfig& config, const ManipMetricsSink* sink) {
  dataset.validate();
  config.validate();
  const int W = dataset.width(), H = dataset.height();
  const int n_views = static_cast<int>(dataset.views.size());
  const int threads = resolve_threads(config.threads);
  const int B = config.rays_per_batch;

  // Frozen renders of the two source volumes; the signed per-pixel target
  // for the residual render is bg - full.
  RenderOptions ropts{{config.n_samples, 0, false, 0}, config.threads};
  std::vector<Image> target(n_views);
  for (int v = 0; v < n_views; ++v) {
    Image f = render_view(full, nullptr, dataset.view_spec(v), ropts).color;
    Image g = render_view(bg, nullptr, dataset.view_spec(v), ropts).color;
    target[v] = g;
    for (size_t i = 0; i < g.data.size(); ++i) target[v].data[i] = g.data[i] - f.data[i];
  }

  auto objective = [&]() {
    // Eq. 8 summed over every view and pixel with the current residual.
    double acc = 0.0;
    for (int v = 0; v < n_views; ++v) {
      Image res = render_view(residual_field, nullptr, dataset.view_spec(v), ropts).color;
      for (size_t i = 0; i < res.data.size(); ++i) {
        double d = res.data[i] - target[v].data[i];
        acc += d * d;
      }
    }
    return acc;
  };

  ManipResult result;
  result.initial_probe = objective();

  AdamState adam(residual_field.param_count());
  GradAccumulator grads(threads, residual_field.param_count());
  std::vector<double> worker_loss(threads);

  for (int64_t k = 0; k < config.iterations; ++k) {
    grads.zero();
    std::fill(worker_loss.begin(), worker_loss.end(), 0.0);

    parallel_for(B, threads, [&](int64_t jb, int64_t je, int w) {
      std::vector<Vec3> pos, dirs, colors;
      std::vector<double> sigma, wadj, sadj;
      std::vector<Vec3> cadj;
      std::vector<FieldOutput> adj;
      for (int64_t j = jb; j < je; ++j) {
        BatchDraw d = draw_pixel(config.seed, 0xd01, k, static_cast<int>(j), n_views, W, H);
        const PosedView& pv = dataset.views[d.view];
        Ray ray = ray_through(pv.intrinsics, pv.pose, d.row, d.col,
                              dataset.t_near, dataset.t_far);
        RaySamples s = sample_stratified(ray, config.n_samples, false, 0, 0);
        size_t n = s.size();
        pos.resize(n);
        dirs.resize(n);
        sigma.resize(n);
        colors.resize(n);
        for (size_t i = 0; i < n; ++i) {
          pos[i] = s.position(ray, i);
          dirs[i] = ray.direction;
          FieldOutput out = residual_field.eval(pos[i], ray.direction);
          sigma[i] = out.density;
          colors[i] = out.color;
        }
        CompositeWeights cw = compositing_weights(sigma, s.delta);
        Vec3 pixel = composite(cw.weight, colors);
        Vec3 diff = pixel - target[d.view].rgb(d.row, d.col);
        worker_loss[w] += diff.squaredNorm();
        Vec3 pixel_adj = 2.0 * diff;

        wadj.assign(n, 0.0);
        cadj.assign(n, Vec3::Zero());
        composite_backward(cw.weight, colors, pixel_adj, wadj, cadj);
        sadj.assign(n, 0.0);
        compositing_weights_backward(sigma, s.delta, cw, wadj, 0.0, sadj);
        adj.resize(n);
        for (size_t i = 0; i < n; ++i) adj[i] = FieldOutput{cadj[i], sadj[i]};
        residual_field.eval_backward(pos, dirs, adj, grads.buffers[w]);
      }
    });

    double loss = 0.0;
    for (double l : worker_loss) loss += l;
    if (!std::isfinite(loss))
      throw NumericError("nonnegative_inpaint: non-finite loss at iteration " +
                         std::to_string(k));

    double lr = exp_decay_lr(config.lr_start, config.lr_end, k, config.iterations);
    adam_step(residual_field.params(), grads.merge(), adam, lr, config.adam);

    if ((k + 1) % config.checkpoint_every == 0 || k + 1 == config.iterations) {
      ManipMetricsRow row{k + 1, loss, lr, 0.0};
      if (k + 1 == config.iterations) {
        result.final_probe = objective();
        row.aux = result.final_probe;
      }
      result.trace.push_back(row);
      if (sink && *sink) (*sink)(row);
    }
  }
  if (config.iterations == 0) result.final_probe = result.initial_probe;

  result.per_view_final.resize(n_views);
  for (int v = 0; v < n_views; ++v) {
    Image res = render_view(residual_field, nullptr, dataset.view_spec(v), ropts).color;
    double acc = 0.0;
    for (size_t i = 0; i < res.data.size(); ++i) {
      double d = res.data[i] - target[v].data[i];
      acc += d * d;
    }
    result.per_view_final[v] = acc;
  }
  return result;
}

// --------------------------------------------------------------------------
// Semantic manipulation (Eqs. 9-11)

namespace {

// Frozen per-pixel foreground stencil at the semantic render resolution:
// background pixel plus the (weight, position) taps the override colors
// enter through. Near-zero taps are culled; they contribute nothing.
struct FrozenView {
  int width = 0, height = 0;
  Image bg_image;                 // x_bg at render resolution
  Image mask;                     // binary, render resolution
  std::vector<std::vector<std::pair<double, Vec3>>> taps;  // per pixel
  Vec3 direction_hint = Vec3::UnitZ();
  std::vector<Vec3> ray_dirs;     // per pixel, for view-dependent overrides
};

FrozenView freeze_view(const RadianceField& full, const RadianceField& bg,
                       const PosedDataset& dataset, int view_index, int W, int H,
                       const ManipConfig& config) {
  const PosedView& pv = dataset.views[view_index];
  FrozenView fv;
  fv.width = W;
  fv.height = H;
  fv.bg_image = Image(W, H, 3);
  fv.taps.resize(static_cast<size_t>(W) * H);
  fv.ray_dirs.resize(static_cast<size_t>(W) * H);

  CameraIntrinsics intr = scale_intrinsics(pv.intrinsics, W, H);
  // Nearest-neighbor keeps the mask binary at the render resolution.
  fv.mask = Image(W, H, 1);
  for (int r = 0; r < H; ++r)
    for (int c = 0; c < W; ++c) {
      int sr = std::min(static_cast<int>((r + 0.5) * pv.mask.height / H), pv.mask.height - 1);
      int sc = std::min(static_cast<int>((c + 0.5) * pv.mask.width / W), pv.mask.width - 1);
      fv.mask.at(r, c) = pv.mask.at(sr, sc);
    }

  parallel_for(static_cast<int64_t>(W) * H, config.threads, [&](int64_t b, int64_t e, int) {
    for (int64_t k = b; k < e; ++k) {
      int row = static_cast<int>(k / W), col = static_cast<int>(k % W);
      Ray ray = ray_through(intr, pv.pose, row, col, dataset.t_near, dataset.t_far);
      FrozenRay fr = freeze_ray(full, bg, ray, config.n_samples);
      fv.bg_image.set_rgb(row, col, fr.bg_pixel);
      fv.ray_dirs[k] = ray.direction;
      auto& taps = fv.taps[k];
      for (size_t i = 0; i < fr.fg.size(); ++i)
        if (std::abs(fr.fg.weights[i]) > 1e-7)
          taps.emplace_back(fr.fg.weights[i], fr.samples.position(ray, i));
    }
  });
  return fv;
}

}  // namespace

ManipResult semantic_manipulate(const RadianceField& full, const RadianceField& bg,
                                const PosedDataset& dataset, SemanticScorer& scorer,
                                RadianceField& override_field,
                                const SemanticConfig& sem, const ManipConfig& config,
                                const ManipMetricsSink* sink) {
  dataset.validate();
  config.validate();
  const int n_views = static_cast<int>(dataset.views.size());
  const int W = sem.render_width > 0 ? sem.render_width : dataset.width();
  const int H = sem.render_height > 0 ? sem.render_height : dataset.height();
  require(sem.view_block >= 1, "semantic: view_block must be >= 1");

  // Per-view background-similarity scorers (Eq. 10 image targets) are built
  // lazily together with the frozen profile cache.
  std::vector<std::unique_ptr<SoftHistogramScorer>> bg_scorers(n_views);
  int cached_view = -1;
  FrozenView fv;

  auto activate_view = [&](int v) {
    if (cached_view == v) return;
    fv = freeze_view(full, bg, dataset, v, W, H, config);
    cached_view = v;
    if (!bg_scorers[v]) {
      Image bg_masked = fv.bg_image;
      for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c)
          if (fv.mask.at(r, c) == 1.0) bg_masked.set_rgb(r, c, Vec3::Zero());
      bg_scorers[v] = SoftHistogramScorer::from_image(prep_for_scorer(bg_masked, sem.prep));
    }
  };

  // One full objective pass for the current override on view v.
  auto view_objective = [&](int v, Image* composite_out, Image* grad_out,
                            double* sim_out) {
    activate_view(v);
    Image xc = fv.bg_image;  // x_c = bg term + sum w_fg * c'
    for (int64_t k = 0; k < static_cast<int64_t>(fv.taps.size()); ++k) {
      Vec3 add = Vec3::Zero();
      for (const auto& [w, p] : fv.taps[k])
        add += w * override_field.eval(p, fv.ray_dirs[k]).color;
      int row = static_cast<int>(k / W), col = static_cast<int>(k % W);
      xc.set_rgb(row, col, xc.rgb(row, col) + add);
    }

    Image combined = xc;  // x_c in the mask, x_bg outside
    for (int r = 0; r < H; ++r)
      for (int c = 0; c < W; ++c)
        if (fv.mask.at(r, c) != 1.0) combined.set_rgb(r, c, fv.bg_image.rgb(r, c));

    Image prepped = prep_for_scorer(combined, sem.prep);
    Image grad_target, grad_bgsim;
    double sim_target = scorer.similarity(prepped, grad_out ? &grad_target : nullptr);
    double sim_bg = bg_scorers[v]->similarity(prepped, grad_out ? &grad_bgsim : nullptr);

    double l_pixel = 0.0;
    for (int r = 0; r < H; ++r)
      for (int c = 0; c < W; ++c) {
        if (fv.mask.at(r, c) == 1.0) continue;
        l_pixel += (xc.rgb(r, c) - fv.bg_image.rgb(r, c)).squaredNorm();
      }

    double loss = sem.target_weight * (1.0 - sim_target) +
                  sem.bg_sim_weight * (1.0 - sim_bg) + sem.bg_pixel_weight * l_pixel;

    if (grad_out) {
      Image g_prepped(prepped.width, prepped.height, 3);
      for (size_t i = 0; i < g_prepped.data.size(); ++i)
        g_prepped.data[i] = -sem.target_weight * grad_target.data[i] -
                            sem.bg_sim_weight * grad_bgsim.data[i];
      Image g_combined(W, H, 3);
      prep_backward(g_prepped, sem.prep, &g_combined);

      *grad_out = Image(W, H, 3);
      for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c) {
          Vec3 g = Vec3::Zero();
          if (fv.mask.at(r, c) == 1.0) {
            g = g_combined.rgb(r, c);
          } else {
            g = sem.bg_pixel_weight * 2.0 * (xc.rgb(r, c) - fv.bg_image.rgb(r, c));
          }
          grad_out->set_rgb(r, c, g);
        }
    }
    if (composite_out) *composite_out = xc;
    if (sim_out) *sim_out = sim_target;
    return loss;
  };

  auto mean_similarity = [&]() {
    double acc = 0.0;
    for (int v = 0; v < n_views; ++v) {
      double sim;
      view_objective(v, nullptr, nullptr, &sim);
      acc += sim;
    }
    return acc / n_views;
  };

  ManipResult result;
  result.initial_probe = mean_similarity();

  AdamState adam(override_field.param_count());
  std::vector<double> grad(override_field.param_count());
  std::vector<Vec3> pos, dirs;
  std::vector<FieldOutput> adj;

  for (int64_t k = 0; k < config.iterations; ++k) {
    int v = static_cast<int>((k / sem.view_block) % n_views);
    Image pixel_grad;
    double sim = 0.0;
    double loss = view_objective(v, nullptr, &pixel_grad, &sim);
    if (!std::isfinite(loss))
      throw NumericError("semantic_manipulate: non-finite loss at iteration " +
                         std::to_string(k));

    pos.clear();
    dirs.clear();
    adj.clear();
    for (int64_t t = 0; t < static_cast<int64_t>(fv.taps.size()); ++t) {
      int row = static_cast<int>(t / W), col = static_cast<int>(t % W);
      Vec3 g = pixel_grad.rgb(row, col);
      for (const auto& [w, p] : fv.taps[t]) {
        pos.push_back(p);
        dirs.push_back(fv.ray_dirs[t]);
        adj.push_back(FieldOutput{w * g, 0.0});
      }
    }
    std::fill(grad.begin(), grad.end(), 0.0);
    override_field.eval_backward(pos, dirs, adj, grad);

    double lr = exp_decay_lr(config.lr_start, config.lr_end, k, config.iterations);
    adam_step(override_field.params(), grad, adam, lr, config.adam);

    if ((k + 1) % config.checkpoint_every == 0 || k + 1 == config.iterations) {
      ManipMetricsRow row{k + 1, loss, lr, sim};
      result.trace.push_back(row);
      if (sink && *sink) (*sink)(row);
    }
  }

  result.final_probe = mean_similarity();
  result.per_view_final.resize(n_views);
  for (int v = 0; v < n_views; ++v)
    view_objective(v, nullptr, nullptr, &result.per_view_final[v]);
  return result;
}

}  // namespace voldis
