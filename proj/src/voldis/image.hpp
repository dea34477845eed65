// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "voldis/common.hpp"

#include <string>
#include <vector>

namespace voldis {

// Row-major H x W x C raster, values in double. Color stays unclipped
// through the pipeline; clipping to [0,1] happens only at 8-bit export.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> data;

  Image() = default;
  Image(int w, int h, int c, double fill = 0.0)
      : width(w), height(h), channels(c),
        data(static_cast<size_t>(w) * h * c, fill) {}

  double& at(int row, int col, int c = 0) {
    return data[(static_cast<size_t>(row) * width + col) * channels + c];
  }
  double at(int row, int col, int c = 0) const {
    return data[(static_cast<size_t>(row) * width + col) * channels + c];
  }
  Vec3 rgb(int row, int col) const {
    size_t i = (static_cast<size_t>(row) * width + col) * channels;
    return Vec3(data[i], data[i + 1], data[i + 2]);
  }
  void set_rgb(int row, int col, const Vec3& v) {
    size_t i = (static_cast<size_t>(row) * width + col) * channels;
    data[i] = v[0];
    data[i + 1] = v[1];
    data[i + 2] = v[2];
  }
  size_t pixel_count() const { return static_cast<size_t>(width) * height; }
  bool same_shape(const Image& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }
};

// 8-bit PNG. Channels 1 or 3; values clipped to [0,1] and quantized.
void write_png(const std::string& path, const Image& img);
// Reads 8-bit PNG as 1- or 3-channel image scaled to [0,1]. Grayscale stays
// 1-channel, everything else is collapsed to RGB.
Image read_png(const std::string& path);

// 32-bit float PFM, scale -1.0 (little endian), rows bottom-to-top.
// 1-channel "Pf" or 3-channel "PF".
void write_pfm(const std::string& path, const Image& img);
Image read_pfm(const std::string& path);

double mse(const Image& a, const Image& b);
// 10*log10(1/MSE) for images in [0,1]; +inf when the images are identical.
double psnr(const Image& a, const Image& b);

// Bilinear sample with clamped edges; fractional (row, col) in pixel units.
Vec3 sample_bilinear(const Image& img, double row, double col);

}  // namespace voldis
