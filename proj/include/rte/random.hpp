#pragma once

#include <cstdint>
#include <string_view>

namespace rte {

/// FNV-1a, 64 bit. Stable across platforms; used for stream keys and config hashes.
constexpr std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based stream: draw n is a pure function of (seed, stream name, n), so results do
/// not depend on evaluation order or worker count.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::string_view name)
      : key_(splitmix64(seed ^ fnv1a64(name))) {}

  std::uint64_t bits(std::uint64_t counter) const {
    return splitmix64(key_ ^ splitmix64(counter + 0x632be59bd9b4e019ULL));
  }
  /// Uniform on [0, 1).
  double uniform(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }
  /// Uniform on [-1, 1).
  double symmetric(std::uint64_t counter) const { return 2.0 * uniform(counter) - 1.0; }

 private:
  std::uint64_t key_;
};

}  // namespace rte
