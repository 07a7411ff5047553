#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace clacorr {

// Deterministic stream splitting.  Every randomized routine derives its own
// engine from (user seed, stream tag, index...) so that results do not depend
// on evaluation order or thread count, and sub-streams never overlap in
// practice.  Mixing is one splitmix64 round per word.

namespace rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix(std::uint64_t seed,
                         std::initializer_list<std::uint64_t> words) {
  std::uint64_t state = seed;
  std::uint64_t out = splitmix64(state);
  for (std::uint64_t w : words) {
    state ^= w;
    out = splitmix64(state);
  }
  return out;
}

// Fixed stream tags; new tags append, existing values never change.
enum Stream : std::uint64_t {
  stream_sample = 1,     // synthetic time series draws
  stream_kmeans = 2,     // k-means initialization
  stream_random_assign = 3,  // random cluster assignment
};

inline std::mt19937_64 engine(std::uint64_t seed, std::uint64_t tag,
                              std::uint64_t index = 0) {
  return std::mt19937_64(mix(seed, {tag, index}));
}

}  // namespace rng
}  // namespace clacorr
