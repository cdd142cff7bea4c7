#pragma once

#include <cstdint>
#include <functional>

namespace conclab {

/// Worker count: hardware concurrency capped by the CONC_LAB_THREADS
/// environment variable (minimum 1).
int worker_count();

/// Runs fn(0..count-1) across workers with static partitioning.
/// fn(i) must only touch slot i of any shared output, which keeps the
/// result independent of the thread count. The first exception thrown
/// by any worker is rethrown on the calling thread.
void parallel_for(std::int64_t count, const std::function<void(std::int64_t)>& fn);

}  // namespace conclab
