#include "alphagp/parallel.hpp"

#include <atomic>
#include <thread>
#include <vector>

namespace alphagp {

void ParallelFor(int n, const std::function<void(int)>& fn, int n_threads) {
  if (n <= 0) return;
  if (n_threads <= 0) {
    n_threads = static_cast<int>(std::thread::hardware_concurrency());
    if (n_threads <= 0) n_threads = 1;
  }
  if (n_threads > n) n_threads = n;
  if (n_threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }

  std::atomic<int> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> workers;
  workers.reserve(n_threads);
  for (int w = 0; w < n_threads; ++w) {
    workers.emplace_back([&] {
      while (!failed.load(std::memory_order_relaxed)) {
        int i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= n) break;
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
          break;
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace alphagp
