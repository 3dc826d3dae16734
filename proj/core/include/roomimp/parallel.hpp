#pragma once

#include <cstddef>
#include <functional>

namespace roomimp {

/// Runs body(i) for i in [0, n) on up to `threads` workers (0 = hardware
/// concurrency). Indices are split into contiguous blocks; callers write
/// results into preallocated slots so output does not depend on scheduling.
/// After all workers join, the exception of the lowest failing index is
/// rethrown.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

unsigned resolve_threads(unsigned requested);

}  // namespace roomimp
