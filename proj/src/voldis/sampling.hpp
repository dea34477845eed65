// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "voldis/geometry.hpp"

#include <vector>

namespace voldis {

// Per-ray sample positions along [t_near, t_far]. t strictly ascending,
// deltas all positive. The last delta has no successor sample; it is capped
// at the mean of the preceding deltas (or the full span for a single sample).
struct RaySamples {
  std::vector<double> t;
  std::vector<double> delta;

  size_t size() const { return t.size(); }
  Vec3 position(const Ray& ray, size_t i) const { return ray.at(t[i]); }
  void compute_deltas();
};

struct CompositeWeights;  // compositing.hpp

// One sample per equal bin of [t_near, t_far]: bin midpoints when jitter is
// off, uniform within the bin otherwise. Jitter draws come from a counter
// generator keyed on (seed, ray_id, bin), so results are independent of call
// order and thread scheduling.
RaySamples sample_stratified(const Ray& ray, int n, bool jitter, uint64_t seed,
                             uint64_t ray_id = 0);

// Inverse-CDF draws from the piecewise-constant distribution over the coarse
// sample intervals, proportional to the coarse weights with a 1e-5 floor per
// bin, merged with the coarse samples and re-sorted. All-zero coarse weights
// fall back to stratified placement (documented behavior, not an error).
RaySamples sample_importance(const Ray& ray, const CompositeWeights& coarse,
                             const RaySamples& coarse_t, int n_fine, bool jitter,
                             uint64_t seed, uint64_t ray_id = 0);

}  // namespace voldis
