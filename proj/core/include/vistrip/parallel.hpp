#pragma once

#include <cstddef>
#include <functional>

namespace vistrip {

/// Worker count: VISTRIP_THREADS if set (>= 1), otherwise the hardware concurrency.
std::size_t thread_budget();

/// Runs fn(i) for i in [0, n) on up to `threads` workers (0 = thread_budget()).
/// Each index runs exactly once; results must go to per-index slots.
/// The first exception thrown by any task is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, std::size_t threads = 0);

}  // namespace vistrip
