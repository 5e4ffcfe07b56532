#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace stablesde {

/// Worker-pool size: explicit argument, else the STABLESDE_THREADS
/// environment variable, else hardware concurrency.
inline int resolve_threads(int requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("STABLESDE_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(i) for i in [0, n). Work is assigned by index stride, so results
/// written to slot i are identical for any thread count.
inline void parallel_for(std::size_t n, int threads,
                         const std::function<void(std::size_t)>& fn) {
  threads = resolve_threads(threads);
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t]() {
      for (std::size_t i = static_cast<std::size_t>(t); i < n;
           i += static_cast<std::size_t>(threads))
        fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace stablesde
