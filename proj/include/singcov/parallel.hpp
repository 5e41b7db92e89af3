#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <thread>
#include <vector>

namespace singcov {

// Runs body(i) for i in [0, n). Work is chunked by index block, results must
// be written to disjoint, preallocated slots so the outcome is independent of
// the worker count.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                         unsigned threads = 1) {
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const unsigned nw = std::min<std::size_t>(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(nw);
  for (unsigned w = 0; w < nw; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += nw) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

inline unsigned default_threads() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

// Pairwise tree reduction; summation order is fixed by the layout of the
// input, not by the worker count.
inline double pairwise_sum(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(xs.subspan(0, half)) + pairwise_sum(xs.subspan(half));
}

}  // namespace singcov
