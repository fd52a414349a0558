#ifndef FMQED_PARALLEL_HPP
#define FMQED_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fmqed {

// Runs body(i) for i in [0, n). Each index writes only its own slot, so the
// caller's later in-order reduction is independent of the thread count.
template <typename Body>
void parallel_for(long n, int jobs, const Body& body) {
  if (jobs <= 1 || n <= 1) {
    for (long i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr err;
  std::mutex err_mutex;
  auto worker = [&]() {
    for (;;) {
      long i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!err) err = std::current_exception();
        next = n;
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int t = static_cast<int>(std::min<long>(jobs, n));
  for (int j = 0; j < t; ++j) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace fmqed

#endif
