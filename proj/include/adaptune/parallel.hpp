#pragma once
// Deterministic fork-join over an index range.

#include <cstddef>
#include <functional>

namespace adaptune {

/// Worker cap; 0 means the number of available cores.
void set_thread_count(int n);
int thread_count();

/// Calls fn(i) for every i in [0, n). Results must be written to per-index
/// slots; the first exception (lowest index) is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace adaptune
