#pragma once

#include <cstddef>
#include <functional>

namespace tcpvad {

/// Worker count: hardware concurrency, capped by the TCP_THREADS env var.
unsigned worker_count();

/// Runs body(i) for i in [0, n). Each index is processed exactly once;
/// callers write results to per-index slots so output is order-independent.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace tcpvad
