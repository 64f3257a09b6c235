#include "polykam/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace polykam {

unsigned thread_cap() noexcept {
  static const unsigned cap = [] {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("POLYKAM_THREADS")) {
      char* end = nullptr;
      long v = std::strtol(env, &end, 10);
      if (end != env && v > 0) return static_cast<unsigned>(v);
    }
    return hw;
  }();
  return cap;
}

void parallel_rows(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body,
                   std::size_t min_rows_per_thread) {
  std::size_t workers = std::min<std::size_t>(thread_cap(), count / std::max<std::size_t>(1, min_rows_per_thread));
  if (workers <= 1) {
    body(0, count);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 1; w < workers; ++w) {
    std::size_t b = w * chunk, e = std::min(count, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&body, b, e] { body(b, e); });
  }
  body(0, std::min(count, chunk));
  for (auto& t : pool) t.join();
}

}  // namespace polykam
