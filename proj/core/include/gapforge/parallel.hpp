#pragma once

#include <cstddef>
#include <functional>

namespace gapforge {

/// Worker count: GAPFORGE_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
std::size_t worker_count();

/// Runs body(i) for i in [0, count). Each index writes only its own output
/// slot, so results do not depend on the thread count. The first exception
/// thrown (lowest index) is rethrown after all workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace gapforge
