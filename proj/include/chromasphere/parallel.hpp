#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace chromasphere {

/// Worker count resolution: an explicit request wins, then the
/// CHROMASPHERE_THREADS environment variable, then hardware concurrency.
inline int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CHROMASPHERE_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

/// Runs fn(i) for every i in [0, n) on up to `workers` threads.
///
/// Contract for callers: fn(i) must write its output to a slot keyed by i
/// (and derive any randomness from i), so results are identical for every
/// worker count and schedule. The first exception thrown by any fn is
/// rethrown on the calling thread after all workers join.
template <class Fn>
inline void parallel_for(int n, int workers, Fn&& fn) {
  if (n <= 0) return;
  int w = std::min(resolve_workers(workers), n);
  if (w <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto body = [&]() {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (int t = 0; t < w; ++t) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace chromasphere
