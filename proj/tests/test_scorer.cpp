// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#include "voldis/scorer.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

using namespace voldis;
using voldis::testing::rel_err;

namespace {

Image solid(int w, int h, const Vec3& color) {
  Image img(w, h, 3);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) img.set_rgb(r, c, color);
  return img;
}

Image noisy(int w, int h, uint64_t seed) {
  Image img(w, h, 3);
  for (size_t i = 0; i < img.data.size(); ++i) img.data[i] = rng_uniform(seed, i);
  return img;
}

}  // namespace

TEST_CASE("image-image similarity of an image with itself is one") {
  Image img = noisy(12, 9, 5);
  auto scorer = SoftHistogramScorer::from_image(img);
  CHECK(scorer->similarity(img, nullptr) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("similarity stays within [-1, 1] and ranks colors sensibly") {
  auto red = SoftHistogramScorer::from_color_name("red");
  Image red_img = solid(8, 8, Vec3(0.9, 0.1, 0.1));
  Image blue_img = solid(8, 8, Vec3(0.1, 0.1, 0.9));
  double s_red = red->similarity(red_img, nullptr);
  double s_blue = red->similarity(blue_img, nullptr);
  CHECK(s_red > s_blue);
  CHECK(s_red <= 1.0);
  CHECK(s_blue >= -1.0);
  CHECK(s_red >= 0.99);
}

TEST_CASE("unknown color names are input errors") {
  CHECK_THROWS_AS(SoftHistogramScorer::from_color_name("chartreuse"), InputError);
}

TEST_CASE("scorer pixel gradients match finite differences") {
  Image img = noisy(6, 5, 17);
  auto scorer = SoftHistogramScorer::from_color_name("orange");
  Image grad;
  scorer->similarity(img, &grad);

  int checked = 0;
  for (size_t i = 0; i < img.data.size() && checked < 30; i += 3) {
    double saved = img.data[i];
    img.data[i] = saved + 1e-5;
    double up = scorer->similarity(img, nullptr);
    img.data[i] = saved - 1e-5;
    double down = scorer->similarity(img, nullptr);
    img.data[i] = saved;
    double fd = (up - down) / 2e-5;
    if (std::abs(fd) < 1e-9 && std::abs(grad.data[i]) < 1e-9) continue;
    CHECK(rel_err(grad.data[i], fd) <= 1e-3);
    ++checked;
  }
  CHECK(checked >= 10);
}

TEST_CASE("scorer prep resamples through the grid to the scorer input size") {
  Image img = noisy(63, 47, 23);
  ScorerPrep prep;
  prep.grid = 16;
  prep.input = 28;
  Image out = prep_for_scorer(img, prep);
  CHECK(out.width == 28);
  CHECK(out.height == 28);

  // A constant image survives both resamplings exactly.
  Image flat = solid(63, 47, Vec3(0.3, 0.6, 0.9));
  Image flat_out = prep_for_scorer(flat, prep);
  for (int r = 0; r < flat_out.height; ++r)
    for (int c = 0; c < flat_out.width; ++c)
      CHECK((flat_out.rgb(r, c) - Vec3(0.3, 0.6, 0.9)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("prep backward is the exact transpose of the forward map") {
  // <A x, y> == <x, A^T y> for random x, y.
  Image x = noisy(15, 11, 31);
  ScorerPrep prep;
  prep.grid = 8;
  prep.input = 12;
  Image Ax = prep_for_scorer(x, prep);
  Image y = noisy(prep.input, prep.input, 37);
  Image ATy(15, 11, 3);
  prep_backward(y, prep, &ATy);

  double lhs = 0.0, rhs = 0.0;
  for (size_t i = 0; i < Ax.data.size(); ++i) lhs += Ax.data[i] * y.data[i];
  for (size_t i = 0; i < x.data.size(); ++i) rhs += x.data[i] * ATy.data[i];
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
}

TEST_CASE("gradient chains through prep into source pixels") {
  Image img = noisy(10, 8, 41);
  ScorerPrep prep;
  prep.grid = 6;
  prep.input = 9;
  auto scorer = SoftHistogramScorer::from_color_name("red");

  auto objective = [&](const Image& source) {
    return scorer->similarity(prep_for_scorer(source, prep), nullptr);
  };

  Image prepped = prep_for_scorer(img, prep);
  Image g_prepped;
  scorer->similarity(prepped, &g_prepped);
  Image g_source(10, 8, 3);
  prep_backward(g_prepped, prep, &g_source);

  int checked = 0;
  for (size_t i = 0; i < img.data.size() && checked < 20; i += 7) {
    double saved = img.data[i];
    img.data[i] = saved + 1e-5;
    double up = objective(img);
    img.data[i] = saved - 1e-5;
    double down = objective(img);
    img.data[i] = saved;
    double fd = (up - down) / 2e-5;
    if (std::abs(fd) < 1e-9 && std::abs(g_source.data[i]) < 1e-9) continue;
    CHECK(rel_err(g_source.data[i], fd) <= 1e-3);
    ++checked;
  }
  CHECK(checked >= 8);
}
