#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace icgtm {

// Process-wide worker count. 0 = use hardware concurrency.
inline std::atomic<int>& thread_count_slot() {
  static std::atomic<int> count{0};
  return count;
}

inline void set_thread_count(int n) { thread_count_slot().store(n < 0 ? 0 : n); }

inline int thread_count() {
  int n = thread_count_slot().load();
  if (n > 0) return n;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs f(i) for i in [0, n). Work is split into contiguous chunks, one per
// worker, so results written to per-index slots land identically for any
// thread count. Exceptions from workers are rethrown on the calling thread.
template <typename F>
void parallel_for(int n, F&& f) {
  if (n <= 0) return;
  const int workers = std::min(thread_count(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::atomic<int> error_guard{0};
  const int chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int begin = w * chunk;
    const int end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      try {
        for (int i = begin; i < end; ++i) {
          if (failed.load(std::memory_order_relaxed)) return;
          f(i);
        }
      } catch (...) {
        if (error_guard.fetch_add(1) == 0) error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace icgtm
