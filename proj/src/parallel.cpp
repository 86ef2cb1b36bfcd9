#include "dmaps/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace dmaps {
namespace {

std::size_t default_threads() {
  if (const char* env = std::getenv("DMAPS_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (...) {
    }
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

std::atomic<std::size_t>& threads() {
  static std::atomic<std::size_t> n{default_threads()};
  return n;
}

}  // namespace

std::size_t thread_count() { return threads().load(std::memory_order_relaxed); }

void set_thread_count(std::size_t n) { threads().store(std::max<std::size_t>(1, n), std::memory_order_relaxed); }

}  // namespace dmaps
