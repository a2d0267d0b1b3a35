#pragma once

#include <cstddef>
#include <functional>

namespace sdlab {

/// Worker count: hardware concurrency, capped by SDLAB_MAX_WORKERS when set.
std::size_t max_workers();

/// Calls body(i) for i in [0, n) on up to max_workers() threads. The first
/// exception thrown by any call is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace sdlab
