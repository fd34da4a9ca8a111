#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <type_traits>
#include <vector>

namespace sog {

// Worker count used when a call passes threads = 0. Initialised from
// SOG_LAB_THREADS (default 1); set_default_threads overrides it.
unsigned default_threads();
void set_default_threads(unsigned threads);

// results[k] = f(k) for k in [0, count). Work is handed out dynamically but every
// result lands in its own slot, so the output never depends on the schedule. If
// several tasks throw, the exception of the smallest index is rethrown.
template <class F>
auto parallel_map(std::size_t count, F&& f, unsigned threads = 0) {
  using R = std::invoke_result_t<F&, std::size_t>;
  std::vector<R> results(count);
  if (threads == 0) threads = default_threads();
  if (threads > count) threads = static_cast<unsigned>(count);
  if (threads <= 1) {
    for (std::size_t k = 0; k < count; ++k) results[k] = f(k);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::size_t err_index = count;
  std::exception_ptr err;
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= count) return;
      try {
        results[k] = f(k);
      } catch (...) {
        std::lock_guard lock(err_mutex);
        if (k < err_index) {
          err_index = k;
          err = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
  return results;
}

}  // namespace sog
