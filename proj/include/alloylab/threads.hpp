#pragma once

// Deterministic fan-out helper: work items are indexed, every item derives its
// own RNG substream from the index, and callers reduce results in index order,
// so the outcome is byte-identical for any worker count.

#include <cstdint>
#include <thread>
#include <vector>

namespace alloylab {

template <typename Fn>
void parallel_for_indexed(std::uint64_t n, int workers, Fn&& fn) {
  if (n == 0) return;
  if (workers < 1) workers = 1;
  const std::uint64_t w = std::min<std::uint64_t>(workers, n);
  if (w == 1) {
    for (std::uint64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (std::uint64_t t = 0; t < w; ++t) {
    const std::uint64_t lo = n * t / w;
    const std::uint64_t hi = n * (t + 1) / w;
    pool.emplace_back([lo, hi, &fn] {
      for (std::uint64_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace alloylab
