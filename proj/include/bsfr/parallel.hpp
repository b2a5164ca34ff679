#pragma once

#include <cstddef>
#include <functional>

namespace bsfr {

/// Runs fn(i) for i in [0, n) on up to `threads` workers (0 means hardware
/// concurrency). Indices are handed out in contiguous blocks; results that
/// depend only on i are therefore independent of the thread count. The first
/// exception thrown by any worker is rethrown on the calling thread.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

int resolve_threads(int threads);

}  // namespace bsfr
