#include "mrl/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace mrl {

int thread_count() {
  if (const char* env = std::getenv("MRL_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return std::min(v, 64);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(std::min(hw, 64u));
}

namespace detail {

void parallel_for_impl(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& chunk) {
  if (n <= 0) return;
  int workers = thread_count();
  if (workers <= 1 || n < 1024) {
    chunk(0, n);
    return;
  }
  workers = static_cast<int>(std::min<std::int64_t>(workers, n));
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  std::int64_t per = (n + workers - 1) / workers;
  for (int t = 1; t < workers; ++t) {
    std::int64_t lo = t * per;
    std::int64_t hi = std::min<std::int64_t>(lo + per, n);
    if (lo >= hi) break;
    pool.emplace_back([&chunk, lo, hi] { chunk(lo, hi); });
  }
  chunk(0, std::min<std::int64_t>(per, n));
  for (auto& th : pool) th.join();
}

}  // namespace detail
}  // namespace mrl
