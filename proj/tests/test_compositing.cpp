// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#include "voldis/compositing.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

using namespace voldis;
using voldis::testing::rel_err;

TEST_CASE("zero density everywhere composites to nothing") {
  std::vector<double> sigma(5, 0.0), delta(5, 0.2);
  CompositeWeights cw = compositing_weights(sigma, delta);
  for (double w : cw.weight) CHECK(w == 0.0);
  CHECK(cw.accumulated_opacity == 0.0);
}

TEST_CASE("an opaque front sample blocks everything behind it") {
  std::vector<double> sigma = {100.0, 3.0, 3.0};
  std::vector<double> delta = {0.5, 0.5, 0.5};
  CompositeWeights cw = compositing_weights(sigma, delta);
  CHECK(cw.weight[0] >= 1.0 - 1e-9);
  CHECK(cw.weight[1] <= 1e-9);
  CHECK(cw.weight[2] <= 1e-9);
}

TEST_CASE("two-sample closed form (hand-evaluated)") {
  std::vector<double> sigma = {1.0, 2.0};
  std::vector<double> delta = {0.5, 0.5};
  CompositeWeights cw = compositing_weights(sigma, delta);
  CHECK(cw.alpha[0] == doctest::Approx(0.393469).epsilon(1e-5));
  CHECK(cw.alpha[1] == doctest::Approx(0.632121).epsilon(1e-5));
  CHECK(cw.weight[0] == doctest::Approx(0.393469).epsilon(1e-5));
  CHECK(cw.weight[1] == doctest::Approx(0.383401).epsilon(1e-5));
}

TEST_CASE("weights match the brute-force closed form to 1e-12") {
  for (int trial = 0; trial < 300; ++trial) {
    int n = 1 + static_cast<int>(rng_uniform(1, trial, 0) * 8);
    std::vector<double> sigma(n), delta(n);
    for (int i = 0; i < n; ++i) {
      sigma[i] = rng_uniform(2, trial, i) * 20.0;
      delta[i] = 0.01 + rng_uniform(3, trial, i) * 0.5;
    }
    CompositeWeights cw = compositing_weights(sigma, delta);
    std::vector<double> oracle = voldis::testing::brute_force_weights(sigma, delta);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      CHECK(std::abs(cw.weight[i] - oracle[i]) <=
            1e-12 * std::max(1.0, std::abs(oracle[i])));
      CHECK(cw.weight[i] >= 0.0);
      sum += cw.weight[i];
    }
    CHECK(sum <= 1.0 + 1e-9);
  }
}

TEST_CASE("increasing a density never decreases its own weight") {
  std::vector<double> sigma = {0.5, 1.5, 0.2, 3.0};
  std::vector<double> delta = {0.3, 0.2, 0.4, 0.1};
  CompositeWeights base = compositing_weights(sigma, delta);
  for (size_t i = 0; i < sigma.size(); ++i) {
    std::vector<double> bumped = sigma;
    bumped[i] += 0.05;
    CompositeWeights cw = compositing_weights(bumped, delta);
    CHECK(cw.weight[i] >= base.weight[i] - 1e-12);
  }
}

TEST_CASE("negative density is an input error") {
  std::vector<double> sigma = {-0.1};
  std::vector<double> delta = {0.5};
  CHECK_THROWS_AS(compositing_weights(sigma, delta), InputError);
}

TEST_CASE("compositing adjoints match finite differences") {
  const int n = 7;
  std::vector<double> sigma(n), delta(n), wadj(n);
  for (int i = 0; i < n; ++i) {
    sigma[i] = rng_uniform(11, i) * 4.0;
    delta[i] = 0.05 + rng_uniform(12, i) * 0.3;
    wadj[i] = rng_uniform(13, i) * 2.0 - 1.0;
  }
  double opacity_adj = 0.37;

  CompositeWeights fwd = compositing_weights(sigma, delta);
  std::vector<double> analytic(n, 0.0);
  compositing_weights_backward(sigma, delta, fwd, wadj, opacity_adj, analytic);

  for (int i = 0; i < n; ++i) {
    double fd = voldis::testing::central_diff(
        [&](double x) {
          std::vector<double> s = sigma;
          s[i] = x;
          CompositeWeights cw = compositing_weights(s, delta);
          double v = opacity_adj * cw.accumulated_opacity;
          for (int k = 0; k < n; ++k) v += wadj[k] * cw.weight[k];
          return v;
        },
        sigma[i]);
    CHECK(rel_err(analytic[i], fd) <= 1e-3);
  }
}

TEST_CASE("composite is the exact dot product, including signed inputs") {
  std::vector<double> w0;
  std::vector<Vec3> c0;
  CHECK(composite(w0, c0) == Vec3::Zero());

  std::vector<double> w1 = {1.0};
  std::vector<Vec3> c1 = {Vec3(0.2, 0.4, 0.6)};
  CHECK(composite(w1, c1).isApprox(Vec3(0.2, 0.4, 0.6), 0.0));

  std::vector<double> w2 = {0.5, 0.25};
  std::vector<Vec3> c2 = {Vec3(1, 0, 0), Vec3(0, 1, 0)};
  CHECK(composite(w2, c2).isApprox(Vec3(0.5, 0.25, 0.0), 1e-15));

  std::vector<double> w3 = {0.5, -0.5};
  std::vector<Vec3> c3 = {Vec3(1, 1, 1), Vec3(1, 0, 0)};
  CHECK(composite(w3, c3).isApprox(Vec3(0.0, 0.5, 0.5), 1e-15));
}

TEST_CASE("composite adjoints match finite differences") {
  const int n = 5;
  std::vector<double> w(n);
  std::vector<Vec3> c(n);
  for (int i = 0; i < n; ++i) {
    w[i] = rng_uniform(21, i) * 2.0 - 1.0;
    c[i] = Vec3(rng_uniform(22, i), rng_uniform(23, i), rng_uniform(24, i));
  }
  Vec3 pixel_adj(0.3, -0.8, 0.5);

  std::vector<double> wadj(n, 0.0);
  std::vector<Vec3> cadj(n, Vec3::Zero());
  composite_backward(w, c, pixel_adj, wadj, cadj);

  for (int i = 0; i < n; ++i) {
    double fd_w = voldis::testing::central_diff(
        [&](double x) {
          std::vector<double> ww = w;
          ww[i] = x;
          return pixel_adj.dot(composite(ww, c));
        },
        w[i]);
    CHECK(rel_err(wadj[i], fd_w) <= 1e-3);
    for (int ch = 0; ch < 3; ++ch) {
      double fd_c = voldis::testing::central_diff(
          [&](double x) {
            std::vector<Vec3> cc = c;
            cc[i][ch] = x;
            return pixel_adj.dot(composite(w, cc));
          },
          c[i][ch]);
      CHECK(rel_err(cadj[i][ch], fd_c) <= 1e-3);
    }
  }
}

TEST_CASE("expected depth and disparity") {
  std::vector<double> w = {1.0};
  std::vector<double> t = {2.0};
  DepthResult d = expected_depth(w, t);
  CHECK(d.depth == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(d.disparity == doctest::Approx(0.5).epsilon(1e-9));

  std::vector<double> w0 = {0.0, 0.0};
  std::vector<double> t0 = {1.0, 2.0};
  CHECK(expected_depth(w0, t0).depth == 0.0);  // empty-ray convention

  std::vector<double> w2 = {0.5, 0.5};
  std::vector<double> t2 = {1.0, 3.0};
  CHECK(expected_depth(w2, t2).depth == doctest::Approx(2.0).epsilon(1e-9));
}
