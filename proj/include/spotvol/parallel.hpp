#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>

namespace spotvol {

/// Serial execution is the reference implementation; parallel execution must
/// reproduce it bit for bit (every index owns its random substream).
enum class Execution { serial, parallel };

/// Calls fn(i) for i in [0, n). Exceptions thrown by fn are rethrown on the
/// calling thread (the first one wins).
template <class Fn>
void for_each_index(std::size_t n, Execution exec, Fn&& fn) {
  if (exec == Execution::serial) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

/// Upper bound on worker threads for subsequent parallel regions (0 = all cores).
void set_worker_threads(int threads);

}  // namespace spotvol
