#ifndef TOOTHSPARSE_PARALLEL_HPP
#define TOOTHSPARSE_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace toothsparse {

/// Thread count from TOOTHSPARSE_THREADS (0 or unset = hardware concurrency).
std::size_t configured_thread_count();

/// Runs fn(0..n-1) across the configured worker threads. Work items must be
/// independent; the first exception thrown by a worker is rethrown here.
/// Callers control determinism by writing results to per-index slots.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace toothsparse

#endif  // TOOTHSPARSE_PARALLEL_HPP
