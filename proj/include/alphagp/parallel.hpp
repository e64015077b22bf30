#pragma once

#include <exception>
#include <functional>

namespace alphagp {

// Runs fn(i) for i in [0, n) across worker threads. Results must be
// written by index so the output is identical to a serial run.
// n_threads <= 0 uses the hardware count; n_threads == 1 runs inline.
// The first exception thrown by any fn is rethrown after all workers
// join.
void ParallelFor(int n, const std::function<void(int)>& fn, int n_threads = 0);

}  // namespace alphagp
