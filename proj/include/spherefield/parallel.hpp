#pragma once

#include <cstddef>
#include <functional>

namespace spherefield {

// Thread count used when a caller passes 0. Reads SPHEREFIELD_THREADS,
// falling back to std::thread::hardware_concurrency().
int default_thread_count();

// Runs body(i) for i in [0, count) on `threads` workers (0 = default).
// Work is split into contiguous blocks; body must only write state owned by
// index i, which keeps results independent of the thread count.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

}  // namespace spherefield
