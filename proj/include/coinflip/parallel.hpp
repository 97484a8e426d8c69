#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace coinflip {

// Worker count used by the library. 0 restores the default: $COINFLIP_THREADS if
// set, else the hardware concurrency.
void set_thread_count(std::size_t threads);
std::size_t thread_count();

// Runs fn(i) for i in [0, tasks). Tasks must write only to their own slots;
// callers combine results in index order, so output never depends on scheduling.
template <class Fn>
void parallel_for(std::size_t tasks, Fn&& fn) {
  const std::size_t workers = std::min(thread_count(), tasks);
  if (workers <= 1) {
    for (std::size_t i = 0; i < tasks; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (std::size_t i = next.fetch_add(1); i < tasks; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(tasks);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace coinflip
