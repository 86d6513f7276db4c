#pragma once

#include <cstddef>
#include <functional>

namespace qdcart {

/// Worker pool size: hardware concurrency capped by the QDCART_THREADS
/// environment variable (ignored unless a positive integer).
int worker_count();

/// Runs fn(0..count-1) across up to `workers` threads. Work items write
/// results into caller-owned slots, so output is schedule-independent.
/// The first exception thrown by any item is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn, int workers);

}  // namespace qdcart
