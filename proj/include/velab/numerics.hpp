#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

namespace velab {

// SplitMix64 mixing step; full-period, passes BigCrush. Used only to derive
// decorrelated stream seeds, never as the sampling engine itself.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Reserved stream indices for run-level subsystems. Small indices (0, 1, 2,
// ...) are for per-item streams (trajectories, Monte-Carlo samples), so the
// reserved block lives far above any realistic item count; distinct purposes
// sharing a seed must never share a stream.
inline constexpr std::uint64_t kStreamNetInit = 0x56454c4142000001ull;
inline constexpr std::uint64_t kStreamBatchData = 0x56454c4142000002ull;
inline constexpr std::uint64_t kStreamBatchNoise = 0x56454c4142000003ull;

// Engine for stream `index` of run-level `seed`. Streams are independent of
// thread scheduling: result depends only on (seed, index).
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t s = seed ^ (0x6a09e667f3bcc909ull + index);
  std::uint64_t a = splitmix64(s);
  std::uint64_t b = splitmix64(s);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

// Compensated (Kahan) summation; with sort_ascending_magnitude the terms are
// accumulated small-to-large, which keeps sums over 4+ decades of magnitude
// accurate to a few ulps.
inline double kahan_total(std::vector<double> terms, bool sort_ascending_magnitude = false) {
  if (sort_ascending_magnitude) {
    std::sort(terms.begin(), terms.end(),
              [](double a, double b) { return std::fabs(a) < std::fabs(b); });
  }
  double sum = 0.0, comp = 0.0;
  for (double t : terms) {
    double y = t - comp;
    double u = sum + y;
    comp = (u - sum) - y;
    sum = u;
  }
  return sum;
}

inline double relative_error(double got, double want, double floor = 0.0) {
  double scale = std::max({std::fabs(got), std::fabs(want), floor});
  if (scale == 0.0) return 0.0;
  return std::fabs(got - want) / scale;
}

// Runs fn(i) for i in [0, count) on up to `threads` workers in contiguous
// chunks. fn must only touch state owned by index i. The first exception
// thrown by any worker is rethrown on the calling thread after all join.
inline void parallel_for(std::int64_t count, int threads,
                         const std::function<void(std::int64_t)>& fn) {
  if (count <= 0) return;
  int workers = std::max(1, threads);
  if (workers == 1 || count == 1) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  workers = static_cast<int>(std::min<std::int64_t>(workers, count));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::int64_t chunk = (count + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    std::int64_t lo = w * chunk;
    std::int64_t hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn, &first_error, &error_mutex] {
      try {
        for (std::int64_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace velab
