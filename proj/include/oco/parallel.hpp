#pragma once

#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace oco {

inline int resolve_threads(int requested, int n) {
  int t = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  if (t < 1) t = 1;
  return t < n ? t : (n < 1 ? 1 : n);
}

/// Run fn(i) for i in [0, n) on a bounded pool. Exceptions are captured and
/// the first one rethrown after all workers join.
template <class Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  const int workers = resolve_threads(threads, n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<size_t>(workers));
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        errors[static_cast<size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// parallel_for with one accumulator per worker; fn(i, acc) folds item i
/// into its worker's accumulator. Returns all per-worker accumulators.
template <class Acc, class Fn>
std::vector<Acc> parallel_reduce(int n, int threads, Acc init, Fn&& fn) {
  const int workers = resolve_threads(threads, n);
  std::vector<Acc> accs(static_cast<size_t>(workers), init);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i, accs[0]);
    return accs;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<size_t>(workers));
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i, accs[static_cast<size_t>(w)]);
      } catch (...) {
        errors[static_cast<size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return accs;
}

}  // namespace oco
