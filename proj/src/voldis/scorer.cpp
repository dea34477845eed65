// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#include "voldis/scorer.hpp"

#include <algorithm>
#include <map>

namespace voldis {

namespace {

constexpr int kB = SoftHistogramScorer::kBinsPerChannel;
constexpr int kBins = kB * kB * kB;
constexpr double kTau = 0.8;  // kernel bandwidth in bin units

// Gaussian soft-assignment of one channel value over all bins. Every bin gets
// a nonzero weight, so the similarity carries gradient signal toward targets
// any distance away in color space, not just into adjacent bins.
struct ChannelTaps {
  double w[kB];
  double dw[kB];  // d(weight)/d(value); zero when the value is clamped
};

ChannelTaps channel_taps(double value) {
  ChannelTaps t;
  double v = clamp01(value);
  double u = v * kB - 0.5;  // continuous bin coordinate, centers at integers
  double e[kB], sum = 0.0;
  for (int i = 0; i < kB; ++i) {
    double d = (u - i) / kTau;
    e[i] = std::exp(-0.5 * d * d);
    sum += e[i];
  }
  double mean_pull = 0.0;  // sum_j w_j (j - u)
  for (int i = 0; i < kB; ++i) {
    t.w[i] = e[i] / sum;
    mean_pull += t.w[i] * (i - u);
  }
  bool clamped = value < 0.0 || value > 1.0;
  for (int i = 0; i < kB; ++i) {
    // d w_i / du for the normalized kernel, times du/dv = kB.
    t.dw[i] = clamped ? 0.0
                      : t.w[i] * ((i - u) - mean_pull) / (kTau * kTau) * kB;
  }
  return t;
}

double norm(const std::vector<double>& h) {
  double s = 0.0;
  for (double v : h) s += v * v;
  return std::sqrt(s);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

std::vector<double> SoftHistogramScorer::feature(const Image& image) {
  require(image.channels == 3, "scorer: expected an RGB image");
  std::vector<double> h(kBins, 0.0);
  double inv_n = 1.0 / static_cast<double>(image.pixel_count());
  for (int r = 0; r < image.height; ++r)
    for (int c = 0; c < image.width; ++c) {
      ChannelTaps tr = channel_taps(image.at(r, c, 0));
      ChannelTaps tg = channel_taps(image.at(r, c, 1));
      ChannelTaps tb = channel_taps(image.at(r, c, 2));
      for (int a = 0; a < kB; ++a)
        for (int b = 0; b < kB; ++b)
          for (int d = 0; d < kB; ++d)
            h[(a * kB + b) * kB + d] += inv_n * tr.w[a] * tg.w[b] * tb.w[d];
    }
  return h;
}

std::unique_ptr<SoftHistogramScorer> SoftHistogramScorer::from_color_name(
    const std::string& name) {
  Vec3 swatch = color_swatch(name);
  Image sw(8, 8, 3);
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 8; ++c) sw.set_rgb(r, c, swatch);
  return std::unique_ptr<SoftHistogramScorer>(
      new SoftHistogramScorer(feature(sw), name));
}

std::unique_ptr<SoftHistogramScorer> SoftHistogramScorer::from_image(const Image& target) {
  return std::unique_ptr<SoftHistogramScorer>(
      new SoftHistogramScorer(feature(target), "image"));
}

double SoftHistogramScorer::similarity(const Image& image, Image* grad) const {
  std::vector<double> h = feature(image);
  double nh = norm(h), nt = norm(target_);
  require(nt > 0.0, "scorer: empty target histogram");
  if (nh == 0.0) {
    if (grad) *grad = Image(image.width, image.height, 3);
    return 0.0;
  }
  double s = std::clamp(dot(h, target_) / (nh * nt), -1.0, 1.0);

  if (grad) {
    *grad = Image(image.width, image.height, 3);
    // d s / d h_k = t_k / (|h||t|) - s * h_k / |h|^2
    std::vector<double> dh(kBins);
    for (int k = 0; k < kBins; ++k)
      dh[k] = target_[k] / (nh * nt) - s * h[k] / (nh * nh);

    double inv_n = 1.0 / static_cast<double>(image.pixel_count());
    for (int r = 0; r < image.height; ++r)
      for (int c = 0; c < image.width; ++c) {
        ChannelTaps t[3] = {channel_taps(image.at(r, c, 0)),
                            channel_taps(image.at(r, c, 1)),
                            channel_taps(image.at(r, c, 2))};
        double gr = 0.0, gg = 0.0, gb = 0.0;
        for (int a = 0; a < kB; ++a)
          for (int b = 0; b < kB; ++b)
            for (int d = 0; d < kB; ++d) {
              double g = dh[(a * kB + b) * kB + d] * inv_n;
              gr += g * t[0].dw[a] * t[1].w[b] * t[2].w[d];
              gg += g * t[0].w[a] * t[1].dw[b] * t[2].w[d];
              gb += g * t[0].w[a] * t[1].w[b] * t[2].dw[d];
            }
        grad->at(r, c, 0) = gr;
        grad->at(r, c, 1) = gg;
        grad->at(r, c, 2) = gb;
      }
  }
  return s;
}

Vec3 color_swatch(const std::string& name) {
  static const std::map<std::string, Vec3> kSwatches = {
      {"red", {0.9, 0.1, 0.1}},     {"green", {0.1, 0.8, 0.15}},
      {"blue", {0.12, 0.2, 0.9}},   {"yellow", {0.9, 0.85, 0.1}},
      {"cyan", {0.1, 0.8, 0.85}},   {"magenta", {0.85, 0.15, 0.8}},
      {"orange", {0.95, 0.55, 0.1}},{"purple", {0.5, 0.15, 0.7}},
      {"white", {0.95, 0.95, 0.95}},{"black", {0.05, 0.05, 0.05}},
      {"gray", {0.5, 0.5, 0.5}},
  };
  auto it = kSwatches.find(name);
  if (it == kSwatches.end())
    throw InputError("unknown color name '" + name + "' for the built-in scorer");
  return it->second;
}

namespace {

struct Tap {
  int lo, hi;
  double w_lo, w_hi;
};

Tap axis_tap(int i, int out_n, int src_n) {
  Tap t;
  if (out_n <= 1 || src_n <= 1) {
    t = {0, 0, 1.0, 0.0};
    return t;
  }
  double u = static_cast<double>(i) * (src_n - 1) / (out_n - 1);
  int lo = std::min(static_cast<int>(u), src_n - 2);
  double f = u - lo;
  t = {lo, lo + 1, 1.0 - f, f};
  return t;
}

}  // namespace

Image resample_bilinear(const Image& src, int out_width, int out_height) {
  Image out(out_width, out_height, src.channels);
  for (int r = 0; r < out_height; ++r) {
    Tap tr = axis_tap(r, out_height, src.height);
    for (int c = 0; c < out_width; ++c) {
      Tap tc = axis_tap(c, out_width, src.width);
      for (int ch = 0; ch < src.channels; ++ch)
        out.at(r, c, ch) = tr.w_lo * (tc.w_lo * src.at(tr.lo, tc.lo, ch) +
                                      tc.w_hi * src.at(tr.lo, tc.hi, ch)) +
                           tr.w_hi * (tc.w_lo * src.at(tr.hi, tc.lo, ch) +
                                      tc.w_hi * src.at(tr.hi, tc.hi, ch));
    }
  }
  return out;
}

void resample_bilinear_transpose(const Image& out_adjoint, Image* src_adjoint) {
  for (int r = 0; r < out_adjoint.height; ++r) {
    Tap tr = axis_tap(r, out_adjoint.height, src_adjoint->height);
    for (int c = 0; c < out_adjoint.width; ++c) {
      Tap tc = axis_tap(c, out_adjoint.width, src_adjoint->width);
      for (int ch = 0; ch < out_adjoint.channels; ++ch) {
        double g = out_adjoint.at(r, c, ch);
        src_adjoint->at(tr.lo, tc.lo, ch) += tr.w_lo * tc.w_lo * g;
        src_adjoint->at(tr.lo, tc.hi, ch) += tr.w_lo * tc.w_hi * g;
        src_adjoint->at(tr.hi, tc.lo, ch) += tr.w_hi * tc.w_lo * g;
        src_adjoint->at(tr.hi, tc.hi, ch) += tr.w_hi * tc.w_hi * g;
      }
    }
  }
}

Image prep_for_scorer(const Image& image, const ScorerPrep& prep) {
  require(prep.grid >= 2 && prep.input >= 2, "scorer prep: sizes must be >= 2");
  Image grid = resample_bilinear(image, prep.grid, prep.grid);
  return resample_bilinear(grid, prep.input, prep.input);
}

void prep_backward(const Image& prepped_adjoint, const ScorerPrep& prep,
                   Image* source_adjoint) {
  Image grid_adj(prep.grid, prep.grid, prepped_adjoint.channels);
  resample_bilinear_transpose(prepped_adjoint, &grid_adj);
  resample_bilinear_transpose(grid_adj, source_adjoint);
}

}  // namespace voldis
