#pragma once

// Deterministic parallel trial execution. Trials are split into a fixed set
// of chunks independent of the thread count; per-chunk accumulators come back
// in chunk order so any merge is bit-reproducible.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

namespace rts {

/// Worker threads to use: RTS_LAB_THREADS when set and positive, otherwise
/// the hardware concurrency (at least 1).
int thread_count();

std::uint64_t splitmix64(std::uint64_t x);

/// Generator for trial `trial` under master seed `seed`.
inline std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(trial + 0x632be59bd9b4e019ULL)));
}

/// Uniform double in [0,1) with 53 random bits.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline constexpr std::int64_t kTrialChunks = 256;

/// Runs fn(begin, end, acc) over [0, trials) in kTrialChunks chunks and
/// returns one accumulator per chunk, in chunk order.
template <class Acc, class Fn>
std::vector<Acc> run_chunked(std::int64_t trials, Fn fn, const Acc& init = Acc{}) {
  const std::int64_t chunks = std::max<std::int64_t>(1, std::min(trials, kTrialChunks));
  std::vector<Acc> out(static_cast<std::size_t>(chunks), init);
  auto bounds = [&](std::int64_t c) { return std::pair{trials * c / chunks, trials * (c + 1) / chunks}; };
  const int workers = static_cast<int>(std::min<std::int64_t>(thread_count(), chunks));
  if (workers <= 1) {
    for (std::int64_t c = 0; c < chunks; ++c) {
      auto [b, e] = bounds(c);
      fn(b, e, out[static_cast<std::size_t>(c)]);
    }
    return out;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::int64_t c = next++; c < chunks; c = next++) {
        try {
          auto [b, e] = bounds(c);
          fn(b, e, out[static_cast<std::size_t>(c)]);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace rts
