// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#include "voldis/trainer.hpp"

#include "voldis/field_io.hpp"
#include "voldis/losses.hpp"
#include "voldis/threading.hpp"

#include <filesystem>

namespace fs = std::filesystem;

namespace voldis {

void TrainConfig::validate() const {
  require(iterations >= 0, "train config: iterations must be >= 0");
  require(rays_per_batch >= 1 && n_coarse >= 1 && n_fine >= 0,
          "train config: counts must be >= 1");
  require(lr_start >= lr_end && lr_end > 0.0,
          "train config: need lr_start >= lr_end > 0");
  require(checkpoint_every >= 1, "train config: checkpoint_every must be >= 1");
}

const RadianceField& FieldPair::render_field() const {
  require(coarse != nullptr, "field pair: missing coarse field");
  return fine ? *fine : *coarse;
}

const RadianceField* FieldPair::proposal() const {
  return fine ? coarse.get() : nullptr;
}

void FieldPair::save(const std::string& dir) const {
  require(coarse != nullptr, "field pair: nothing to save");
  fs::create_directories(dir);
  save_field(*coarse, (fs::path(dir) / "coarse.vdsf").string());
  if (!adam_coarse.m.empty())
    save_adam_state(adam_coarse, (fs::path(dir) / "coarse_adam.vdsf").string());
  if (fine) {
    save_field(*fine, (fs::path(dir) / "fine.vdsf").string());
    if (!adam_fine.m.empty())
      save_adam_state(adam_fine, (fs::path(dir) / "fine_adam.vdsf").string());
  }
}

FieldPair FieldPair::load(const std::string& dir) {
  FieldPair pair;
  fs::path coarse_path = fs::path(dir) / "coarse.vdsf";
  if (!fs::exists(coarse_path))
    throw InputError("field pair: missing checkpoint: " + coarse_path.string());
  pair.coarse = load_field(coarse_path.string());
  fs::path fine_path = fs::path(dir) / "fine.vdsf";
  if (fs::exists(fine_path)) pair.fine = load_field(fine_path.string());
  fs::path ac = fs::path(dir) / "coarse_adam.vdsf";
  if (fs::exists(ac)) pair.adam_coarse = load_adam_state(ac.string());
  fs::path af = fs::path(dir) / "fine_adam.vdsf";
  if (fs::exists(af)) pair.adam_fine = load_adam_state(af.string());
  return pair;
}

RenderResult render_dataset_view(const FieldPair& fields, const PosedDataset& dataset,
                                 int view_index, const TrainConfig& config) {
  RenderOptions opts;
  opts.sampling.n_coarse = config.n_coarse;
  opts.sampling.n_fine = config.use_fine ? config.n_fine : 0;
  opts.sampling.jitter = false;
  opts.sampling.seed = config.seed;
  opts.threads = config.threads;
  return render_view(fields.render_field(), fields.proposal(),
                     dataset.view_spec(view_index), opts);
}

namespace {

int effective_holdout(const TrainConfig& config, int n_views) {
  if (config.holdout_view == -2 || n_views < 2) return -1;
  if (config.holdout_view == -1) return n_views - 1;
  require(config.holdout_view < n_views, "train config: holdout view out of range");
  return config.holdout_view;
}

// Per-iteration sample storage for one rendering pass of the whole batch.
struct PassBuffers {
  int n_samples = 0;
  std::vector<double> t, delta, sigma;
  std::vector<Vec3> color;
  std::vector<Vec3> pixels;

  void resize(int rays, int samples) {
    n_samples = samples;
    size_t n = static_cast<size_t>(rays) * samples;
    t.resize(n);
    delta.resize(n);
    sigma.resize(n);
    color.resize(n);
    pixels.resize(rays);
  }
  size_t offset(int ray) const { return static_cast<size_t>(ray) * n_samples; }
};

struct RayBatch {
  std::vector<Ray> rays;
  std::vector<Vec3> targets;
  std::vector<double> mask;
  std::vector<uint64_t> uid;
};

void forward_pass(const RadianceField& field, const RayBatch& batch,
                  const RaySamples& samples, int ray, PassBuffers& buf) {
  size_t off = buf.offset(ray);
  const Ray& r = batch.rays[ray];
  size_t n = samples.size();
  for (size_t i = 0; i < n; ++i) {
    buf.t[off + i] = samples.t[i];
    buf.delta[off + i] = samples.delta[i];
    FieldOutput out = field.eval(r.at(samples.t[i]), r.direction);
    buf.sigma[off + i] = out.density;
    buf.color[off + i] = out.color;
  }
  CompositeWeights cw = compositing_weights(
      std::span(buf.sigma).subspan(off, n), std::span(buf.delta).subspan(off, n));
  buf.pixels[ray] = composite(cw.weight, std::span(buf.color).subspan(off, n));
}

void backward_pass(const RadianceField& field, const RayBatch& batch, int ray,
                   const PassBuffers& buf, const Vec3& pixel_adjoint,
                   std::vector<Vec3>& scratch_pos, std::vector<Vec3>& scratch_dir,
                   std::vector<FieldOutput>& scratch_adj,
                   std::vector<double>& scratch_wadj, std::vector<Vec3>& scratch_cadj,
                   std::vector<double>& scratch_sadj, std::span<double> grad) {
  size_t off = buf.offset(ray);
  size_t n = buf.n_samples;
  auto sigma = std::span(buf.sigma).subspan(off, n);
  auto delta = std::span(buf.delta).subspan(off, n);
  auto color = std::span(buf.color).subspan(off, n);

  CompositeWeights cw = compositing_weights(sigma, delta);
  scratch_wadj.assign(n, 0.0);
  scratch_cadj.assign(n, Vec3::Zero());
  composite_backward(cw.weight, color, pixel_adjoint, scratch_wadj, scratch_cadj);
  scratch_sadj.assign(n, 0.0);
  compositing_weights_backward(sigma, delta, cw, scratch_wadj, 0.0, scratch_sadj);

  scratch_pos.resize(n);
  scratch_dir.resize(n);
  scratch_adj.resize(n);
  const Ray& r = batch.rays[ray];
  for (size_t i = 0; i < n; ++i) {
    scratch_pos[i] = r.at(buf.t[off + i]);
    scratch_dir[i] = r.direction;
    scratch_adj[i] = FieldOutput{scratch_cadj[i], scratch_sadj[i]};
  }
  field.eval_backward(scratch_pos, scratch_dir, scratch_adj, grad);
}

}  // namespace

FitResult fit_field(const PosedDataset& dataset, FieldPair& fields, LossKind loss,
                    const TrainConfig& config, const FitCallbacks* callbacks) {
  dataset.validate();
  config.validate();
  require(fields.coarse != nullptr, "fit_field: missing coarse field");
  bool fine = config.use_fine && fields.fine != nullptr;

  FitResult result;
  result.holdout_view = effective_holdout(config, static_cast<int>(dataset.views.size()));

  std::vector<int> train_views;
  for (int v = 0; v < static_cast<int>(dataset.views.size()); ++v)
    if (v != result.holdout_view) train_views.push_back(v);

  std::vector<Image> masks;
  for (const PosedView& v : dataset.views)
    masks.push_back(dilate_mask(v.mask, config.mask_dilation));

  if (fields.adam_coarse.m.size() != fields.coarse->param_count())
    fields.adam_coarse = AdamState(fields.coarse->param_count());
  if (fine && fields.adam_fine.m.size() != fields.fine->param_count())
    fields.adam_fine = AdamState(fields.fine->param_count());

  const int threads = resolve_threads(config.threads);
  const int B = config.rays_per_batch;
  const int n_merged = config.n_coarse + config.n_fine;

  std::vector<std::vector<double>> grad_coarse(threads), grad_fine(threads);
  for (int w = 0; w < threads; ++w) {
    grad_coarse[w].resize(fields.coarse->param_count());
    if (fine) grad_fine[w].resize(fields.fine->param_count());
  }

  RayBatch batch;
  batch.rays.resize(B);
  batch.targets.resize(B);
  batch.mask.resize(B);
  batch.uid.resize(B);
  PassBuffers coarse_buf, fine_buf;
  coarse_buf.resize(B, config.n_coarse);
  if (fine) fine_buf.resize(B, n_merged);
  std::vector<Vec3> adj_coarse(B), adj_fine(B);

  const int W = dataset.width(), H = dataset.height();
  auto emit_metrics = [&](int64_t iter, double loss_value, double lr) {
    MetricsRow row;
    row.iteration = iter;
    row.loss = loss_value;
    row.lr = lr;
    row.psnr = std::numeric_limits<double>::quiet_NaN();
    if (result.holdout_view >= 0) {
      RenderResult r = render_dataset_view(fields, dataset, result.holdout_view, config);
      row.psnr = psnr(export_color(r.color), dataset.views[result.holdout_view].image);
    }
    result.trace.push_back(row);
    if (callbacks && callbacks->on_metrics) callbacks->on_metrics(row);
  };

  for (int64_t k = 0; k < config.iterations; ++k) {
    // Batch draw is independent of threading: one counter stream per (k, j).
    for (int j = 0; j < B; ++j) {
      int vi = train_views[static_cast<size_t>(
          rng_uniform(config.seed, 0xb01, k, j) * train_views.size())];
      int row = static_cast<int>(rng_uniform(config.seed, 0xb02, k, j) * H);
      int col = static_cast<int>(rng_uniform(config.seed, 0xb03, k, j) * W);
      row = std::min(row, H - 1);
      col = std::min(col, W - 1);
      const PosedView& view = dataset.views[vi];
      batch.rays[j] = ray_through(view.intrinsics, view.pose, row, col,
                                  dataset.t_near, dataset.t_far);
      batch.targets[j] = view.image.rgb(row, col);
      batch.mask[j] = masks[vi].at(row, col);
      batch.uid[j] = hash_combine(static_cast<uint64_t>(k), static_cast<uint64_t>(j));
    }

    // Forward both passes.
    parallel_for(B, threads, [&](int64_t b, int64_t e, int) {
      for (int64_t j = b; j < e; ++j) {
        RaySamples cs = sample_stratified(batch.rays[j], config.n_coarse, config.jitter,
                                          config.seed, batch.uid[j]);
        forward_pass(*fields.coarse, batch, cs, static_cast<int>(j), coarse_buf);
        if (fine) {
          size_t off = coarse_buf.offset(static_cast<int>(j));
          auto sigma = std::span(coarse_buf.sigma).subspan(off, config.n_coarse);
          auto delta = std::span(coarse_buf.delta).subspan(off, config.n_coarse);
          CompositeWeights cw = compositing_weights(sigma, delta);
          RaySamples ms = sample_importance(batch.rays[j], cw, cs, config.n_fine,
                                            config.jitter, config.seed, batch.uid[j]);
          forward_pass(*fields.fine, batch, ms, static_cast<int>(j), fine_buf);
        }
      }
    });

    // Both passes receive the selected loss.
    double loss_value = 0.0;
    if (loss == LossKind::Full) {
      loss_value += loss_full(coarse_buf.pixels, batch.targets, adj_coarse);
      if (fine) loss_value += loss_full(fine_buf.pixels, batch.targets, adj_fine);
    } else {
      loss_value += loss_masked_bg(coarse_buf.pixels, batch.targets, batch.mask, adj_coarse);
      if (fine)
        loss_value += loss_masked_bg(fine_buf.pixels, batch.targets, batch.mask, adj_fine);
    }
    if (!std::isfinite(loss_value))
      throw NumericError("fit_field: non-finite loss at iteration " + std::to_string(k));

    // Backward into per-worker buffers, merged in worker order.
    for (int w = 0; w < threads; ++w) {
      std::fill(grad_coarse[w].begin(), grad_coarse[w].end(), 0.0);
      if (fine) std::fill(grad_fine[w].begin(), grad_fine[w].end(), 0.0);
    }
    parallel_for(B, threads, [&](int64_t b, int64_t e, int w) {
      std::vector<Vec3> pos, dir, cadj;
      std::vector<FieldOutput> fadj;
      std::vector<double> wadj, sadj;
      for (int64_t j = b; j < e; ++j) {
        backward_pass(*fields.coarse, batch, static_cast<int>(j), coarse_buf,
                      adj_coarse[j], pos, dir, fadj, wadj, cadj, sadj, grad_coarse[w]);
        if (fine)
          backward_pass(*fields.fine, batch, static_cast<int>(j), fine_buf,
                        adj_fine[j], pos, dir, fadj, wadj, cadj, sadj, grad_fine[w]);
      }
    });
    for (int w = 1; w < threads; ++w) {
      for (size_t i = 0; i < grad_coarse[0].size(); ++i)
        grad_coarse[0][i] += grad_coarse[w][i];
      if (fine)
        for (size_t i = 0; i < grad_fine[0].size(); ++i)
          grad_fine[0][i] += grad_fine[w][i];
    }

    double lr = exp_decay_lr(config.lr_start, config.lr_end, k, config.iterations);
    adam_step(fields.coarse->params(), grad_coarse[0], fields.adam_coarse, lr, config.adam);
    if (fine)
      adam_step(fields.fine->params(), grad_fine[0], fields.adam_fine, lr, config.adam);

    if ((k + 1) % config.checkpoint_every == 0 || k + 1 == config.iterations) {
      emit_metrics(k + 1, loss_value, lr);
      if (callbacks && callbacks->on_checkpoint) callbacks->on_checkpoint(k + 1);
    }
  }

  return result;
}

}  // namespace voldis
