#pragma once

#include <cstddef>
#include <functional>

namespace filippov {

/// Worker count: hardware concurrency, capped by FILIPPOV_THREADS when set
/// to a positive integer.
unsigned worker_count();

/// Calls body(i) for i in [0, n) on up to worker_count() threads. Each index
/// is visited once; the first exception thrown is rethrown after all workers
/// finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace filippov
