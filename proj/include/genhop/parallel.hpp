#pragma once

#include <cstddef>
#include <functional>

namespace genhop {

/// Worker count: hardware concurrency, capped by GENHOP_THREADS when set.
std::size_t worker_count();

/// Runs fn(i) for i in [0, n). Each index must write only its own outputs;
/// the first exception thrown by any worker is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace genhop
