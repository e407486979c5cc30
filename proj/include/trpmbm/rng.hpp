#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace trpmbm {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of the stream addressed by `seed` and a list of counters (run, step, tree, ...).
inline constexpr std::uint64_t stream_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> counters) noexcept {
  std::uint64_t h = splitmix64(seed);
  for (auto c : counters) h = splitmix64(h ^ splitmix64(c + 0x632be59bd9b4e019ULL));
  return h;
}

inline std::mt19937_64 make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> counters) {
  return std::mt19937_64(stream_seed(seed, counters));
}

/// Stream tags, so that streams for different purposes never collide.
enum class StreamTag : std::uint64_t { kBirth = 1, kTree = 2, kDetection = 3, kClutter = 4, kRun = 5 };

inline constexpr std::uint64_t tag(StreamTag t) noexcept { return static_cast<std::uint64_t>(t); }

}  // namespace trpmbm
