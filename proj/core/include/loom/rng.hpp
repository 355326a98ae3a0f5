#pragma once

#include <cstdint>
#include <initializer_list>

namespace loom {

// Counter-based pseudo-random scheme: every draw is addressed by
// (seed, stream, indices) and computed statelessly with the SplitMix64
// finalizer, so concurrent callers can never perturb each other's streams.
// The mapping is fixed; changing it invalidates recorded fixtures.

// Named sub-streams. Values are part of the determinism contract.
enum class Stream : std::uint64_t {
  PlanEvent = 1,
  PlanFiller = 2,
  ParseNoise = 3,
  WriteEvent = 4,
  WriteFiller = 5,
  RolloutEvent = 6,
  Screen = 7,
  Scenario = 8,
  TaskUnit = 9,
  TaskEvent = 10,
  Backoff = 11,
  RefineEvent = 12,
  Shuffle = 13,
  Generic = 14,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t mix_key(std::uint64_t h, std::uint64_t k) {
  return splitmix64(h ^ splitmix64(k));
}

// Hash of (seed, stream, a, b, c, d). Any subset of indices may be used.
constexpr std::uint64_t counter_hash(std::uint64_t seed, Stream stream, std::uint64_t a = 0,
                                     std::uint64_t b = 0, std::uint64_t c = 0,
                                     std::uint64_t d = 0) {
  std::uint64_t h = splitmix64(seed);
  h = mix_key(h, static_cast<std::uint64_t>(stream));
  h = mix_key(h, a);
  h = mix_key(h, b);
  h = mix_key(h, c);
  h = mix_key(h, d);
  return h;
}

// Uniform double in [0, 1) from the addressed draw.
constexpr double counter_uniform(std::uint64_t seed, Stream stream, std::uint64_t a = 0,
                                 std::uint64_t b = 0, std::uint64_t c = 0,
                                 std::uint64_t d = 0) {
  return static_cast<double>(counter_hash(seed, stream, a, b, c, d) >> 11) * 0x1.0p-53;
}

// Index in [0, n). n must be > 0.
constexpr std::uint64_t counter_pick(std::uint64_t n, std::uint64_t seed, Stream stream,
                                     std::uint64_t a = 0, std::uint64_t b = 0,
                                     std::uint64_t c = 0, std::uint64_t d = 0) {
  const std::uint64_t h = counter_hash(seed, stream, a, b, c, d);
  return static_cast<std::uint64_t>((static_cast<__uint128_t>(h) * n) >> 64);
}

}  // namespace loom
