#pragma once

// Deterministic fork-join helpers. Indices are split into contiguous static
// blocks and every index writes only its own result slot, so the outcome never
// depends on the number of threads.

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace zetalab {

/// Runs fn(state, i) for i in [0, n). Each worker owns one state built by
/// make_state(); the first exception (lowest worker index) is rethrown.
template <typename MakeState, typename Fn>
void parallel_for_with_state(std::size_t n, int threads, MakeState&& make_state, Fn&& fn) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), n));
  if (workers <= 1) {
    if (n == 0) return;
    auto state = make_state();
    for (std::size_t i = 0; i < n; ++i) fn(state, i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = n * w / workers;
    const std::size_t end = n * (w + 1) / workers;
    pool.emplace_back([&, w, begin, end] {
      try {
        auto state = make_state();
        for (std::size_t i = begin; i < end; ++i) fn(state, i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  struct Empty {};
  parallel_for_with_state(
      n, threads, [] { return Empty{}; }, [&](Empty&, std::size_t i) { fn(i); });
}

}  // namespace zetalab
