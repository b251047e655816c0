#pragma once

#include <cstddef>
#include <functional>

namespace cq {

/// Worker count: explicit override > CQ_THREADS environment variable >
/// hardware concurrency. Always at least 1.
int thread_count();

/// Overrides the worker count for this process (0 restores auto).
void set_thread_count(int n);

/// Runs fn(0..n-1) across the worker pool. Iteration order is unspecified;
/// callers own determinism (independent slots, fixed post-collection order).
/// The first exception thrown by fn is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace cq
