#pragma once

// Deterministic chunked parallel map. Chunk boundaries depend only on the
// problem size, never on the thread count, so results reduce identically.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rbb {

inline std::size_t worker_count() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

/// Splits [0, n) into fixed chunks of `chunk` items and evaluates
/// fn(begin, end) for each; returns the results in chunk order.
template <class Fn>
auto parallel_chunks(std::size_t n, std::size_t chunk, Fn&& fn) {
  using R = decltype(fn(std::size_t{}, std::size_t{}));
  chunk = std::max<std::size_t>(chunk, 1);
  const std::size_t n_chunks = (n + chunk - 1) / chunk;
  std::vector<R> out(n_chunks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t c; (c = next.fetch_add(1)) < n_chunks;) {
      try {
        out[c] = fn(c * chunk, std::min(n, (c + 1) * chunk));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(worker_count(), n_chunks);
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace rbb
