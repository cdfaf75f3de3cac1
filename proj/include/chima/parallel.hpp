#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <limits>
#include <thread>
#include <vector>

namespace chima {

// Runs fn(i) for i in [0, count) on up to `threads` workers. Index i is
// owned by worker i % threads, so callers writing result[i] need no
// locking. If any call throws, the exception from the smallest failing
// index is rethrown after all workers join, so failures are reproducible
// regardless of scheduling.
template <class Fn>
void parallel_for(std::int64_t count, int threads, Fn&& fn) {
  if (count <= 0) return;
  const int workers = static_cast<int>(std::clamp<std::int64_t>(threads, 1, count));
  if (workers == 1) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }

  std::vector<std::int64_t> failed_at(workers, std::numeric_limits<std::int64_t>::max());
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::int64_t i = w; i < count; i += workers) {
          try {
            fn(i);
          } catch (...) {
            failed_at[w] = i;
            errors[w] = std::current_exception();
            return;
          }
        }
      });
    }
  }

  int first = -1;
  for (int w = 0; w < workers; ++w) {
    if (errors[w] && (first < 0 || failed_at[w] < failed_at[first])) first = w;
  }
  if (first >= 0) std::rethrow_exception(errors[first]);
}

}  // namespace chima
