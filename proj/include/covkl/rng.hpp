#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace covkl::rng {

using Engine = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Child seed for a sequence of integer labels.
std::uint64_t derive(std::uint64_t seed, std::initializer_list<std::uint64_t> keys);
/// Child seed for a named purpose ("split", "sample", ...).
std::uint64_t derive(std::uint64_t seed, std::string_view label);

/// Maps 64 random bits to a double in the open interval (0, 1).
inline double unit_open(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

inline double uniform(Engine& eng) { return unit_open(eng()); }

} // namespace covkl::rng
