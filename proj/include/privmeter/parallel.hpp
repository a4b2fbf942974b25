#pragma once

#include <cstddef>
#include <functional>

namespace privmeter {

/// Worker count from PRIVMETER_THREADS, falling back to the number of logical cores.
std::size_t default_thread_count();

/// Runs task(i) for every i in [0, count) on up to `threads` workers (0 = default).
/// Tasks must write to disjoint outputs; the first exception thrown by any task is
/// rethrown after all workers have stopped.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& task);

}  // namespace privmeter
