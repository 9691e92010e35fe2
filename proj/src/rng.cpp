#include "covkl/rng.hpp"

namespace covkl::rng {

std::uint64_t derive(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = splitmix64(seed);
  for (auto k : keys) h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

std::uint64_t derive(std::uint64_t seed, std::string_view label) {
  // FNV-1a over the label bytes
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return derive(seed, {h});
}

} // namespace covkl::rng
