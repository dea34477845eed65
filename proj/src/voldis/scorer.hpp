// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "voldis/image.hpp"

#include <memory>
#include <string>

namespace voldis {

// Differentiable perceptual similarity between an image and a target bound
// at construction. Returns a value in [-1, 1]; 1 means perceptually similar.
// Implementations need not be reentrant; callers serialize access.
class SemanticScorer {
 public:
  virtual ~SemanticScorer() = default;
  // If grad is non-null it receives d(sim)/d(pixel), same shape as image.
  virtual double similarity(const Image& image, Image* grad) const = 0;
  virtual std::string describe() const = 0;
};

// Built-in reference scorer: cosine similarity between 64-bin (4x4x4 RGB)
// soft color histograms. Soft trilinear binning keeps the feature
// differentiable with respect to every pixel. For the image-image mode,
// sim(I, I) = 1 exactly. A CLIP-backed scorer can implement the same
// interface externally; CLIP itself is out of scope here.
class SoftHistogramScorer final : public SemanticScorer {
 public:
  static constexpr int kBinsPerChannel = 4;

  // Target from a color-name swatch (red, green, blue, ...).
  static std::unique_ptr<SoftHistogramScorer> from_color_name(const std::string& name);
  // Target from a reference image.
  static std::unique_ptr<SoftHistogramScorer> from_image(const Image& target);

  double similarity(const Image& image, Image* grad) const override;
  std::string describe() const override { return "soft-histogram:" + label_; }

  // Soft histogram feature, normalized to sum 1.
  static std::vector<double> feature(const Image& image);

 private:
  SoftHistogramScorer(std::vector<double> target, std::string label)
      : target_(std::move(target)), label_(std::move(label)) {}

  std::vector<double> target_;
  std::string label_;
};

// Maps a color name to its reference swatch value.
Vec3 color_swatch(const std::string& name);

// Scorer input preparation: sample a grid x grid point lattice from the
// render, then bilinearly upsample to input x input.
struct ScorerPrep {
  int grid = 128;
  int input = 224;
};
Image prep_for_scorer(const Image& image, const ScorerPrep& prep);
// Transpose of prep_for_scorer: adjoint on the prepared image accumulated
// back onto the source image.
void prep_backward(const Image& prepped_adjoint, const ScorerPrep& prep,
                   Image* source_adjoint);

// Generic bilinear resample (corner-aligned) and its transpose.
Image resample_bilinear(const Image& src, int out_width, int out_height);
void resample_bilinear_transpose(const Image& out_adjoint, Image* src_adjoint);

}  // namespace voldis
