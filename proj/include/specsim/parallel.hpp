#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace specsim {

/// Worker count: SPECSIM_THREADS if set and positive, else hardware concurrency.
inline int default_thread_count() {
  if (const char* env = std::getenv("SPECSIM_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (...) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Calls body(i) for i in [begin, end). Each index is processed exactly once; the
/// body must only write to index-owned state. The first exception is rethrown.
template <class Body>
void parallel_for(long begin, long end, Body&& body, int threads = 0) {
  if (end <= begin) return;
  if (threads <= 0) threads = default_thread_count();
  const long count = end - begin;
  threads = static_cast<int>(std::min<long>(threads, count));
  if (threads <= 1) {
    for (long i = begin; i < end; ++i) body(i);
    return;
  }
  std::atomic<long> next{begin};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const long i = next.fetch_add(1);
      if (i >= end) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(end);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace specsim
