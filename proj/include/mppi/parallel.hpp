#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace mppi {

/// Runs fn over contiguous chunks of [0, n) on up to n_threads workers.
/// Callers own determinism: chunks must write disjoint output slots.
inline void parallel_for_chunks(int n, int n_threads,
                                const std::function<void(int, int)>& fn) {
  if (n <= 0) return;
  if (n_threads <= 1 || n == 1) {
    fn(0, n);
    return;
  }
  const int workers = std::min(n_threads, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const int chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int begin = w * chunk;
    const int end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace mppi
