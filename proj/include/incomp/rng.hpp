#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace incomp {

using Generator = std::mt19937_64;

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

// Keyed derivation of an independent stream: the same (seed, name) always
// yields the same sequence, distinct names yield unrelated sequences.
inline Generator make_stream(std::uint64_t seed, std::string_view name) {
  std::uint64_t key = detail::splitmix64(seed ^ detail::splitmix64(detail::fnv1a(name)));
  std::seed_seq seq{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32),
                    static_cast<std::uint32_t>(detail::splitmix64(key)),
                    static_cast<std::uint32_t>(detail::splitmix64(key) >> 32)};
  return Generator(seq);
}

inline std::string push_stream_name(std::size_t node) { return "B:" + std::to_string(node); }

constexpr std::string_view kArrivalStream = "arrivals";
constexpr std::string_view kTiebreakStream = "tiebreak";

}  // namespace incomp
