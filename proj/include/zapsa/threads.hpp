#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace zapsa {

// Worker count: ZAPSA_THREADS when set, otherwise the hardware count.
inline int worker_count() {
  if (const char* env = std::getenv("ZAPSA_THREADS")) {
    const int requested = std::atoi(env);
    if (requested >= 1) return requested;
  }
  const int n = static_cast<int>(std::thread::hardware_concurrency());
  return n < 1 ? 1 : n;
}

// Runs f(i) for i in [0, n). Each index owns its output slot, so results do
// not depend on scheduling.
inline void run_indexed(int n, const std::function<void(int)>& f) {
  const int workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) f(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace zapsa
