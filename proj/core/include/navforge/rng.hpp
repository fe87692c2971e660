#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace navforge {

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// mt19937_64 with hand-rolled value mapping so streams are identical on every
// platform; std distributions are not pinned by the standard, the engine is.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), eng_(splitmix64(seed)) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return eng_(); }

  // [0, 1)
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // [lo, hi] inclusive
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(index(static_cast<std::size_t>(hi - lo) + 1));
  }

  // [0, n)
  std::size_t index(std::size_t n) {
    if (n <= 1) return 0;
    std::uint64_t bound = ~std::uint64_t{0} - (~std::uint64_t{0} % n + 1) % n;
    std::uint64_t x = next_u64();
    while (x > bound) x = next_u64();
    return static_cast<std::size_t>(x % n);
  }

  bool chance(double p) { return uniform() < p; }

  // Independent named substream; (seed, label, index) fully determines it.
  Rng derive(std::string_view label, std::uint64_t index = 0) const {
    std::uint64_t mixed = splitmix64(seed_ ^ fnv1a64(label));
    return Rng(splitmix64(mixed + index));
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 eng_;
};

}  // namespace navforge
