#pragma once

#include <cstddef>
#include <functional>

namespace sepcov {

/// Number of workers for a `--threads` style request: values < 1 mean
/// "auto" (hardware concurrency, at least 1).
int resolve_threads(int requested) noexcept;

/// Calls fn(i) for every i in [0, count) on up to `threads` workers. Work is
/// handed out by index, so results written to slot i do not depend on
/// scheduling. The first exception thrown by any call is rethrown after all
/// workers have stopped.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace sepcov
