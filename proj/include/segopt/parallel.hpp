#pragma once

#include <cstddef>
#include <functional>

namespace segopt {

// Worker count: SEGOPT_THREADS when set to a positive integer, otherwise the
// hardware concurrency (at least 1).
std::size_t thread_count();

// Runs body(i) for i in [0, n). Indices are handed out in contiguous blocks so
// results written by index are deterministic regardless of thread count. The
// first exception thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace segopt
