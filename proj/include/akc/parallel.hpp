#pragma once

// Deterministic data-parallel helpers. Work is split into fixed-size chunks
// whose boundaries depend only on the problem size, so results are identical
// for every thread count.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

namespace akc {

inline constexpr std::size_t kChunk = 4096;

inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Calls body(begin, end) for each chunk of [0, count). Exceptions from any
/// worker are rethrown on the calling thread (first one wins).
template <class Body>
void for_chunks(std::size_t count, unsigned threads, Body&& body,
                std::size_t chunk = kChunk) {
  const std::size_t chunks = (count + chunk - 1) / chunk;
  if (chunks == 0) return;
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), chunks));
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c)
      body(c * chunk, std::min(count, (c + 1) * chunk));
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto run = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= chunks) return;
      try {
        body(c * chunk, std::min(count, (c + 1) * chunk));
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next.store(chunks);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Pairwise (tree) sum; deterministic and with O(log n) error growth.
inline double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& v) {
  return pairwise_sum(v.data(), v.size());
}

/// Sum of f(i) for i in [0, count): per-chunk pairwise sums, then a pairwise
/// sum over chunk totals.
template <class F>
double parallel_sum(std::size_t count, unsigned threads, F&& f) {
  const std::size_t chunks = (count + kChunk - 1) / kChunk;
  std::vector<double> partial(chunks, 0.0);
  for_chunks(count, threads, [&](std::size_t b, std::size_t e) {
    std::vector<double> local(e - b);
    for (std::size_t i = b; i < e; ++i) local[i - b] = f(i);
    partial[b / kChunk] = pairwise_sum(local);
  });
  return pairwise_sum(partial);
}

/// Max of f(i) over [0, count), 0 for an empty range.
template <class F>
double parallel_max(std::size_t count, unsigned threads, F&& f) {
  const std::size_t chunks = (count + kChunk - 1) / kChunk;
  std::vector<double> partial(chunks, 0.0);
  for_chunks(count, threads, [&](std::size_t b, std::size_t e) {
    double m = 0.0;
    for (std::size_t i = b; i < e; ++i) m = std::max(m, f(i));
    partial[b / kChunk] = m;
  });
  double m = 0.0;
  for (double p : partial) m = std::max(m, p);
  return m;
}

/// out[i] = f(i), filled in parallel.
template <class T, class F>
std::vector<T> parallel_map(std::size_t count, unsigned threads, F&& f) {
  std::vector<T> out(count);
  for_chunks(count, threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) out[i] = f(i);
  });
  return out;
}

/// Seeded random source. Uniforms are derived from raw 64-bit draws so the
/// stream is identical across standard library implementations.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) { return next() % bound; }

private:
  std::mt19937_64 engine_;
};

}  // namespace akc
