// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#include "voldis/threading.hpp"

#include <algorithm>
#include <thread>
#include <vector>

namespace voldis {

int hardware_threads() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

int resolve_threads(int requested) {
  if (requested <= 0) return hardware_threads();
  return requested;
}

void parallel_for(int64_t n, int threads,
                  const std::function<void(int64_t, int64_t, int)>& fn,
                  int64_t chunk_size) {
  if (n <= 0) return;
  threads = resolve_threads(threads);
  if (chunk_size < 1) chunk_size = 1;
  int64_t n_chunks = (n + chunk_size - 1) / chunk_size;
  threads = static_cast<int>(std::min<int64_t>(threads, n_chunks));

  if (threads == 1) {
    for (int64_t k = 0; k < n_chunks; ++k) {
      int64_t b = k * chunk_size;
      fn(b, std::min(n, b + chunk_size), 0);
    }
    return;
  }

  auto run_worker = [&](int w) {
    for (int64_t k = w; k < n_chunks; k += threads) {
      int64_t b = k * chunk_size;
      fn(b, std::min(n, b + chunk_size), w);
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(threads - 1);
  for (int w = 1; w < threads; ++w) pool.emplace_back(run_worker, w);
  run_worker(0);
  for (auto& t : pool) t.join();
}

}  // namespace voldis
