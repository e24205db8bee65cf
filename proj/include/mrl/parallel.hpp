#pragma once

#include <cstdint>
#include <functional>

namespace mrl {

/// Worker count: MRL_THREADS if set (clamped to [1, 64]), else the hardware
/// concurrency. Read at call time so tests can toggle it with setenv.
int thread_count();

namespace detail {
void parallel_for_impl(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& chunk);
}

/// Runs body(i) for i in [0, n). Each index must write only to its own
/// output slot; reductions are done by the caller after the loop, so results
/// are bit-identical for any thread count.
template <class F>
void parallel_for(std::int64_t n, F&& body) {
  detail::parallel_for_impl(n, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t i = lo; i < hi; ++i) body(i);
  });
}

}  // namespace mrl
