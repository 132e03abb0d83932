#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace bdie {

/// Chunked parallel loop. Each index must write only its own outputs; chunk
/// boundaries do not change per-index summation order, so parallel runs are
/// bitwise identical to serial ones.
inline void parallel_for(int n, const std::function<void(int)>& fn, bool parallel = true) {
  if (!parallel || n < 4) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  const int nthreads = std::max(1, std::min({hw, n, 16}));
  if (nthreads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (int t = 0; t < nthreads; ++t) {
    pool.emplace_back([&, t]() {
      for (int i = t; i < n; i += nthreads) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace bdie
