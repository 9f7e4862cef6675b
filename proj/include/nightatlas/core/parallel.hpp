#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace nightatlas::core {

// Global cap on worker threads (1 = fully sequential). The CLI --threads flag
// sets this once at startup.
void set_thread_cap(int n);
int thread_cap();

// Runs fn(i) for i in [0,n). Work is split into contiguous index blocks, one
// per worker; every index is processed exactly once and each worker iterates
// its block in order, so results do not depend on the number of threads as
// long as distinct indices never write the same memory.
template <typename Fn>
void parallel_for(std::size_t n, const Fn& fn) {
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(thread_cap()), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t block = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * block;
    const std::size_t hi = std::min(n, lo + block);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace nightatlas::core
