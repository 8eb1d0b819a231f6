#pragma once

#include <cstddef>
#include <functional>

// Deterministic fork-join helper. Work items are indexed 0..n-1 and the
// mapping from index to work is fixed, so results are identical for any
// thread count. Nested calls from inside a worker run serially to avoid
// oversubscription. Thread count: LAGSYNTH_THREADS env var, else hardware
// concurrency, always at least 1.

namespace lagsynth {

std::size_t thread_count();
bool in_parallel_region();

// Runs fn(i) for i in [0, n). Exceptions from workers are captured and the
// first one (by index) is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace lagsynth
