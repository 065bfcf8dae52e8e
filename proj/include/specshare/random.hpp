#pragma once

#include <cstdint>
#include <random>

namespace specshare {

using Rng = std::mt19937_64;

/// One step of the SplitMix64 mixer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Child seed for stream `index` of `master`. Distinct indices give
/// statistically independent streams; the mapping is stable across runs.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

// Named sub-streams used inside one Monte Carlo sample.
enum class Stream : std::uint64_t {
  deployment = 1,
  initial_matching = 2,
  fades = 3,
  solver = 4,
  learning = 5,
};

inline Rng make_rng(std::uint64_t sample_seed, Stream s, std::uint64_t round = 0) {
  return Rng(derive_seed(derive_seed(sample_seed, static_cast<std::uint64_t>(s)), round));
}

}  // namespace specshare
