// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "voldis/adam.hpp"
#include "voldis/dataset.hpp"
#include "voldis/field.hpp"
#include "voldis/renderer.hpp"

#include <functional>
#include <memory>
#include <string>

namespace voldis {

enum class LossKind { Full, MaskedBackground };

struct TrainConfig {
  int64_t iterations = 20000;
  int rays_per_batch = 1024;
  int n_coarse = 64;
  int n_fine = 64;
  double lr_start = 5e-4;
  double lr_end = 5e-5;
  AdamConfig adam;
  uint64_t seed = 0;
  bool deterministic = true;
  int threads = 0;
  int64_t checkpoint_every = 500;
  int holdout_view = -1;  // -1: last view; -2: none
  int mask_dilation = 0;
  bool use_fine = true;
  bool jitter = true;

  void validate() const;
};

// Coarse/fine hierarchical pair trained together. With use_fine off only the
// coarse field exists and renders get a denser stratified pass instead.
struct FieldPair {
  std::unique_ptr<RadianceField> coarse;
  std::unique_ptr<RadianceField> fine;  // may be null
  AdamState adam_coarse;
  AdamState adam_fine;

  const RadianceField& render_field() const;
  // Proposal used for importance sampling; null when there is no fine field.
  const RadianceField* proposal() const;

  void save(const std::string& dir) const;  // checkpoints + adam sidecars
  static FieldPair load(const std::string& dir);
};

struct MetricsRow {
  int64_t iteration = 0;
  double loss = 0.0;
  double lr = 0.0;
  double psnr = 0.0;
};

struct FitCallbacks {
  std::function<void(const MetricsRow&)> on_metrics;
  std::function<void(int64_t)> on_checkpoint;
};

struct FitResult {
  std::vector<MetricsRow> trace;
  int holdout_view = -1;
};

// Per iteration: sample a ray batch uniformly over (view, pixel), render the
// coarse and fine passes, apply the loss to both, and update both fields.
// Deterministic for a fixed seed and thread count.
FitResult fit_field(const PosedDataset& dataset, FieldPair& fields, LossKind loss,
                    const TrainConfig& config, const FitCallbacks* callbacks = nullptr);

// Render one dataset view with the pair (used for held-out PSNR and the CLI).
RenderResult render_dataset_view(const FieldPair& fields, const PosedDataset& dataset,
                                 int view_index, const TrainConfig& config);

}  // namespace voldis
