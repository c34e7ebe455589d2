#pragma once

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qportfolio::detail {

// Static block partition of [0, count) over `threads` workers.  The split
// depends only on (count, threads) and workers share nothing mutable, so
// callers get the same per-index results for any thread count.
template <typename Fn>
void parallel_for(long long count, int threads, Fn&& fn) {
  threads = std::max(1, threads);
  if (threads == 1 || count < 2) {
    for (long long i = 0; i < count; ++i) fn(i);
    return;
  }
  const long long workers = std::min<long long>(threads, count);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  std::exception_ptr error;
  std::mutex error_mutex;
  for (long long w = 0; w < workers; ++w) {
    const long long begin = count * w / workers;
    const long long end = count * (w + 1) / workers;
    pool.emplace_back([&, begin, end] {
      try {
        for (long long i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace qportfolio::detail
