// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>

namespace voldis {

int hardware_threads();

// Resolve a thread-count request: 0 means "all hardware threads".
int resolve_threads(int requested);

// Runs fn(begin, end, worker) over [0, n) split into fixed-size chunks.
// Chunk k is always handled by worker (k % threads), so any per-worker
// accumulation buffers see their chunks in a fixed order and a merge over
// worker index 0..threads-1 is reproducible for a given thread count.
void parallel_for(int64_t n, int threads,
                  const std::function<void(int64_t, int64_t, int)>& fn,
                  int64_t chunk_size = 256);

}  // namespace voldis
