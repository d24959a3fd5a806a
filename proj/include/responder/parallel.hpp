#pragma once

#include <cstddef>
#include <functional>

namespace responder {

/// Worker count: RESPONDER_THREADS if set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
std::size_t default_worker_count();

/// Calls body(i) for every i in [0, n). Each index is visited exactly once;
/// callers write results into per-index slots so the outcome does not depend
/// on scheduling. The first exception thrown by any worker is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, std::size_t workers);

}  // namespace responder
