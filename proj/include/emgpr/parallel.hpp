#pragma once

#include <cstddef>
#include <functional>

namespace emgpr {

/// Number of worker threads used by parallel_for; 0 means hardware concurrency.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Runs fn(begin, end) over contiguous chunks of [0, n).
///
/// Chunks are disjoint; callers write only to per-index outputs, so results do
/// not depend on the number of threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

} // namespace emgpr
