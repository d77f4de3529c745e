#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace wirenet {

// Global worker count for data-parallel grid loops (set from the CLI
// --threads flag). Work items write into preallocated slots indexed by grid
// position and reductions run sequentially afterwards, so results are
// identical for any thread count.
inline unsigned& worker_threads() {
  static unsigned n = std::thread::hardware_concurrency() ? std::thread::hardware_concurrency() : 1;
  return n;
}

inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  unsigned nt = worker_threads();
  if (nt <= 1 || count < 2 * nt) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(nt);
  const std::size_t chunk = std::max<std::size_t>(1, count / (8 * nt));
  for (unsigned t = 0; t < nt; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        std::size_t begin = next.fetch_add(chunk);
        if (begin >= count) return;
        std::size_t end = std::min(count, begin + chunk);
        for (std::size_t i = begin; i < end; ++i) body(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace wirenet
