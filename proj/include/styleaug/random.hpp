#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace styleaug {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a base seed and a list of tags.
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = splitmix64(base);
  for (std::uint64_t t : tags) h = splitmix64(h ^ splitmix64(t + 0x632BE59BD9B4E019ULL));
  return h;
}

/// Named stream tags so each consumer of randomness owns its own generator.
enum class Stream : std::uint64_t {
  Split = 1,
  Init = 2,
  Batches = 3,
  StandardAug = 4,
  StyleAug = 5,
  Method = 6,
  StyleTraining = 7,
};

inline Rng make_stream(std::uint64_t seed, Stream s, std::uint64_t sub = 0) {
  return Rng(derive_seed(seed, {static_cast<std::uint64_t>(s), sub}));
}

}  // namespace styleaug
