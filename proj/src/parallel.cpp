#include "coinflip/parallel.hpp"

#include <cstdlib>
#include <string>

namespace coinflip {
namespace {

std::atomic<std::size_t> g_threads{0};

std::size_t default_threads() {
  if (const char* env = std::getenv("COINFLIP_THREADS")) {
    try {
      const auto v = std::stoul(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
    }
  }
  const auto hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace

void set_thread_count(std::size_t threads) { g_threads.store(threads); }

std::size_t thread_count() {
  const auto t = g_threads.load();
  return t == 0 ? default_threads() : t;
}

}  // namespace coinflip
