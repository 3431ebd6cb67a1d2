#pragma once

#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace sgdlab {

// Replica fan-out. Results are keyed by replica index (counter-based
// streams), so the thread count never changes any output.

inline int resolve_threads(int threads) {
  if (threads > 0) return threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

inline std::uint64_t parallel_count(std::uint64_t n, int threads,
                                    const std::function<bool(std::uint64_t)>& pred) {
  const int nt = resolve_threads(threads);
  if (nt <= 1 || n < 2) {
    std::uint64_t hits = 0;
    for (std::uint64_t r = 0; r < n; ++r) hits += pred(r) ? 1 : 0;
    return hits;
  }
  std::vector<std::uint64_t> partial(static_cast<std::size_t>(nt), 0);
  std::vector<std::thread> pool;
  for (int w = 0; w < nt; ++w) {
    pool.emplace_back([&, w]() {
      std::uint64_t hits = 0;
      for (std::uint64_t r = static_cast<std::uint64_t>(w); r < n;
           r += static_cast<std::uint64_t>(nt)) {
        hits += pred(r) ? 1 : 0;
      }
      partial[static_cast<std::size_t>(w)] = hits;
    });
  }
  for (auto& th : pool) th.join();
  std::uint64_t total = 0;
  for (std::uint64_t h : partial) total += h;
  return total;
}

inline void parallel_for(std::uint64_t n, int threads,
                         const std::function<void(std::uint64_t)>& fn) {
  const int nt = resolve_threads(threads);
  if (nt <= 1 || n < 2) {
    for (std::uint64_t r = 0; r < n; ++r) fn(r);
    return;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < nt; ++w) {
    pool.emplace_back([&, w]() {
      for (std::uint64_t r = static_cast<std::uint64_t>(w); r < n;
           r += static_cast<std::uint64_t>(nt)) {
        fn(r);
      }
    });
  }
  for (auto& th : pool) th.join();
}

inline std::vector<double> parallel_collect(std::uint64_t n, int threads,
                                            const std::function<double(std::uint64_t)>& fn) {
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  const int nt = resolve_threads(threads);
  if (nt <= 1 || n < 2) {
    for (std::uint64_t r = 0; r < n; ++r) out[static_cast<std::size_t>(r)] = fn(r);
    return out;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < nt; ++w) {
    pool.emplace_back([&, w]() {
      for (std::uint64_t r = static_cast<std::uint64_t>(w); r < n;
           r += static_cast<std::uint64_t>(nt)) {
        out[static_cast<std::size_t>(r)] = fn(r);
      }
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace sgdlab
