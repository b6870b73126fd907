#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace llpd {

// Worker cap shared by all parallel regions. Settable via set_max_threads
// (the CLI --threads flag) or the LLPD_THREADS environment variable.
inline int& max_threads_slot() {
  static int value = 0;  // 0 = auto
  return value;
}

inline void set_max_threads(int n) { max_threads_slot() = n; }

inline int effective_threads() {
  int cap = max_threads_slot();
  if (cap <= 0) {
    if (const char* env = std::getenv("LLPD_THREADS")) cap = std::atoi(env);
  }
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  if (cap <= 0 || cap > hw) cap = hw;
  return cap;
}

// Runs fn(i) for i in [0, n) across worker threads. fn must not touch
// shared mutable state without its own synchronization.
inline void parallel_for(int n, const std::function<void(int)>& fn) {
  const int workers = std::min(effective_threads(), std::max(n, 1));
  if (workers <= 1 || n < 2) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace llpd
