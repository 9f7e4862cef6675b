#include "nightatlas/core/parallel.hpp"

#include <atomic>

namespace nightatlas::core {

namespace {
std::atomic<int> g_thread_cap{1};
}

void set_thread_cap(int n) { g_thread_cap.store(n < 1 ? 1 : n); }

int thread_cap() { return g_thread_cap.load(); }

}  // namespace nightatlas::core
