#pragma once

#include <cstddef>
#include <functional>

namespace flagmult {

// Worker count: FLAGMULT_THREADS if set (>= 1), else hardware concurrency.
int thread_count();

// Runs body(i) for i in [0, n). Each index is handled exactly once; callers
// write into per-index slots and reduce afterwards so results do not depend
// on the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace flagmult
