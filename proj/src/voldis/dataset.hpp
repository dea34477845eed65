// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "voldis/analytic.hpp"
#include "voldis/geometry.hpp"
#include "voldis/image.hpp"

#include <string>
#include <vector>

namespace voldis {

struct PosedView {
  Image image;  // H x W x 3 in [0,1]
  Image mask;   // H x W x 1, values exactly 0 or 1; 1 marks the foreground object
  Pose pose;
  CameraIntrinsics intrinsics;
};

struct PosedDataset {
  std::vector<PosedView> views;
  double t_near = 0.0;
  double t_far = 0.0;

  int width() const { return views.empty() ? 0 : views[0].image.width; }
  int height() const { return views.empty() ? 0 : views[0].image.height; }
  ViewSpec view_spec(int index) const;
  void validate() const;
};

// Directory layout: manifest.json, images/NNNN.png, masks/NNNN.png and an
// optional depth/NNNN.pfm per view. The manifest schema is fixed:
// {"resolution":[W,H],"t_near":f,"t_far":f,
//  "views":[{"image":p,"mask":p,"pose":[12 row-major 3x4 floats],
//            "focal":f,"principal":[cx,cy]}]}
void save_dataset(const PosedDataset& dataset, const std::string& dir,
                  const std::vector<Image>* depth_maps = nullptr);
PosedDataset load_dataset(const std::string& dir);

// Grows mask=1 regions by a disc of the given pixel radius (for noisy masks).
Image dilate_mask(const Image& mask, int radius);

struct GenerateConfig {
  AnalyticScene scene;
  ArcSpec arc;
  int width = 64;
  int height = 64;
  OracleRenderConfig oracle;
  double mask_threshold = 0.5;  // on foreground-only accumulated opacity
  uint64_t seed = 0;            // recorded for provenance; generation is closed-form
};

struct GeneratedDataset {
  PosedDataset dataset;
  std::vector<RenderResult> gt_full;
  std::vector<RenderResult> gt_background;
  std::vector<RenderResult> gt_foreground;
};

// Cameras on the forward-facing arc aimed at the scene centroid; images
// ray-marched against the analytic oracle; masks thresholded from the
// foreground-only opacity.
GeneratedDataset generate_dataset(const GenerateConfig& config);

// Writes dataset plus the three oracle render sets (gt_full/, gt_background/,
// gt_foreground/ with color PNGs) under dir.
void save_generated(const GeneratedDataset& gen, const std::string& dir);

}  // namespace voldis
