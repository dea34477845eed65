// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#include "voldis/sampling.hpp"

#include "voldis/compositing.hpp"

#include <algorithm>

namespace voldis {

void RaySamples::compute_deltas() {
  size_t n = t.size();
  delta.resize(n);
  if (n == 0) return;
  double sum = 0.0;
  for (size_t i = 0; i + 1 < n; ++i) {
    delta[i] = t[i + 1] - t[i];
    sum += delta[i];
  }
  // No successor for the last sample; cap at the mean of the preceding gaps.
  delta[n - 1] = n > 1 ? sum / static_cast<double>(n - 1) : 1.0;
}

RaySamples sample_stratified(const Ray& ray, int n, bool jitter, uint64_t seed,
                             uint64_t ray_id) {
  require(n >= 1, "sample_stratified: need at least one sample");
  require(ray.t_near < ray.t_far, "sample_stratified: empty t range");
  RaySamples s;
  s.t.resize(n);
  double span = ray.t_far - ray.t_near;
  double bin = span / n;
  for (int i = 0; i < n; ++i) {
    double u = jitter ? rng_uniform(seed, ray_id, static_cast<uint64_t>(i)) : 0.5;
    s.t[i] = ray.t_near + (i + u) * bin;
  }
  if (n == 1 && !jitter) s.t[0] = ray.t_near + 0.5 * span;
  s.compute_deltas();
  if (s.size() == 1) s.delta[0] = span;
  return s;
}

RaySamples sample_importance(const Ray& ray, const CompositeWeights& coarse,
                             const RaySamples& coarse_t, int n_fine, bool jitter,
                             uint64_t seed, uint64_t ray_id) {
  require(n_fine >= 1, "sample_importance: need at least one sample");
  require(coarse.size() == coarse_t.size() && coarse_t.size() >= 2,
          "sample_importance: coarse pass shape mismatch");

  size_t n_bins = coarse_t.size() - 1;
  std::vector<double> fine_t(n_fine);

  double raw_total = 0.0;
  for (size_t i = 0; i < n_bins; ++i) {
    require(coarse.weight[i] >= 0.0, "sample_importance: negative coarse weight");
    raw_total += coarse.weight[i];
  }

  if (raw_total <= 0.0) {
    // Nothing hit on the coarse pass; spread the fine samples uniformly.
    Ray sub = ray;
    RaySamples uniform = sample_stratified(sub, n_fine, jitter, seed, hash_combine(ray_id, 0x51));
    fine_t = uniform.t;
  } else {
    // Piecewise-constant CDF over the coarse intervals, 1e-5 floor per bin.
    std::vector<double> cdf(n_bins + 1, 0.0);
    for (size_t i = 0; i < n_bins; ++i)
      cdf[i + 1] = cdf[i] + std::max(coarse.weight[i], 1e-5);
    double total = cdf.back();
    for (double& c : cdf) c /= total;
    cdf.back() = 1.0;

    for (int j = 0; j < n_fine; ++j) {
      double xi = jitter ? rng_uniform(seed, hash_combine(ray_id, 0x52), static_cast<uint64_t>(j))
                         : 0.5;
      double u = (j + xi) / n_fine;
      auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      size_t idx = std::min(static_cast<size_t>(std::distance(cdf.begin(), it)) - 1, n_bins - 1);
      double lo = cdf[idx], hi = cdf[idx + 1];
      double frac = hi > lo ? (u - lo) / (hi - lo) : 0.5;
      fine_t[j] = coarse_t.t[idx] + frac * (coarse_t.t[idx + 1] - coarse_t.t[idx]);
    }
  }

  RaySamples merged;
  merged.t.resize(coarse_t.size() + fine_t.size());
  std::merge(coarse_t.t.begin(), coarse_t.t.end(), fine_t.begin(), fine_t.end(),
             merged.t.begin());
  // Exact collisions would produce zero-width segments; nudge them apart.
  for (size_t i = 1; i < merged.t.size(); ++i)
    if (merged.t[i] <= merged.t[i - 1])
      merged.t[i] = std::nextafter(merged.t[i - 1], ray.t_far + 1.0);
  merged.compute_deltas();
  return merged;
}

}  // namespace voldis
