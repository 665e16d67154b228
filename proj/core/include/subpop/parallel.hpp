#pragma once

#include <cstddef>
#include <functional>

namespace subpop {

/// Worker cap: SUBPOP_THREADS when set (minimum 1), otherwise the hardware
/// concurrency.
std::size_t worker_limit();

/// Runs fn(0) .. fn(count-1), possibly concurrently. Callers own determinism:
/// each task writes only to its own index-addressed slot, and any cross-task
/// reduction happens afterwards in index order. The first exception thrown by
/// a task is rethrown here.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace subpop
