#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <random>
#include <thread>
#include <vector>

namespace tiedown {

using Engine = std::mt19937_64;

/// Trials are split into fixed-size blocks; each block owns an engine derived
/// from (seed, block index), so results never depend on the worker count.
inline constexpr std::size_t kBlockSize = std::size_t{1} << 14;

inline Engine block_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x71ed0u};
  return Engine(seq);
}

/// Uniform double on the open interval (0,1) built from the top 53 bits.
inline double uniform_open(Engine& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline double exponential1(Engine& rng) { return -std::log(uniform_open(rng)); }

/// Worker count: LAB_THREADS when set, hardware concurrency otherwise.
inline unsigned worker_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("LAB_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return std::min<unsigned>(static_cast<unsigned>(v), hw);
  }
  return hw;
}

/// Runs fn(block) for block in [0, blocks). Blocks are claimed in order by a
/// small pool of threads; fn must only write to storage owned by its block.
template <class Fn>
void for_each_block(std::size_t blocks, Fn&& fn) {
  const unsigned workers = std::min<std::size_t>(worker_count(), std::max<std::size_t>(blocks, 1));
  if (workers <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) fn(b);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t b = w; b < blocks; b += workers) fn(b);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline std::size_t block_count(std::size_t count) { return (count + kBlockSize - 1) / kBlockSize; }

}  // namespace tiedown
