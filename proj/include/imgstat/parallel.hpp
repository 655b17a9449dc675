#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace imgstat {

// Explicit request, else IMGSTAT_THREADS, else hardware concurrency.
inline unsigned resolve_threads(std::optional<unsigned> requested = std::nullopt) {
  if (requested && *requested > 0) return *requested;
  if (const char* env = std::getenv("IMGSTAT_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Calls fn(index, worker) for every index in [0, n) on up to `threads`
// workers. Work is claimed dynamically, so callers must not depend on which
// worker handles which index. The first exception is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i, 0u);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i, w);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            next = n;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace imgstat
