#pragma once

#include <cstddef>
#include <functional>

namespace oampump {

/// Worker count: hardware concurrency capped by OAMPUMP_THREADS when set.
unsigned worker_count();

/// Calls fn(i) for i in [0, n) on up to worker_count() threads. Exceptions are
/// rethrown for the lowest failing index.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace oampump
