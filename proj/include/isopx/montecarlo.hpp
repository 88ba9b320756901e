#pragma once

// Counter-seeded Gaussian streams and a chunked, deterministic parallel driver.
//
// Every chunk of `chunk_size` samples draws from its own generator, seeded from
// (seed, chunk index) alone, so the numbers a chunk sees never depend on which
// worker ran it. Results are stored per chunk and reduced in index order.

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace isopx {

inline constexpr std::uint64_t chunk_size = std::uint64_t{1} << 16;

inline std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// xoshiro256** (Blackman & Vigna).
class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed) noexcept {
    for (auto& word : s_) word = splitmix64(seed);
  }

  std::uint64_t operator()() noexcept {
    const std::uint64_t result = std::rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = std::rotl(s_[3], 45);
    return result;
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t s_[4]{};
};

// Standard normal variates by the Marsaglia polar method.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) noexcept : rng_(seed) {}

  double next() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * rng_.uniform() - 1.0;
      v = 2.0 * rng_.uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
  }

  void fill(std::span<double> out) noexcept {
    for (auto& x : out) x = next();
  }

 private:
  Xoshiro256 rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline GaussianStream chunk_stream(std::uint64_t seed, std::uint64_t chunk) noexcept {
  std::uint64_t mix = seed;
  const std::uint64_t a = splitmix64(mix);
  std::uint64_t counter = a ^ (chunk * 0xd1b54a32d192ed03ULL);
  return GaussianStream(splitmix64(counter));
}

// Worker count: ISOPX_THREADS when set to a positive integer, else the hardware count.
inline unsigned worker_count() {
  if (const char* env = std::getenv("ISOPX_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs body(stream, count, acc) once per chunk and returns the per-chunk
// accumulators in chunk order.
template <class Acc, class Body>
std::vector<Acc> run_chunked(std::uint64_t samples, std::uint64_t seed, const Acc& init, Body body) {
  const std::uint64_t chunks = (samples + chunk_size - 1) / chunk_size;
  std::vector<Acc> results(chunks, init);
  if (chunks == 0) return results;

  auto run_one = [&](std::uint64_t c) {
    const std::uint64_t begin = c * chunk_size;
    const std::uint64_t count = std::min(chunk_size, samples - begin);
    auto stream = chunk_stream(seed, c);
    body(stream, count, results[c]);
  };

  const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(worker_count(), chunks));
  if (workers <= 1) {
    for (std::uint64_t c = 0; c < chunks; ++c) run_one(c);
    return results;
  }

  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        try {
          for (std::uint64_t c = next++; c < chunks; c = next++) run_one(c);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = chunks;
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

}  // namespace isopx
