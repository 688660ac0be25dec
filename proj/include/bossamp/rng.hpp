#pragma once

#include <cstdint>
#include <cmath>

namespace bossamp {

// splitmix64 mixer (Vigna). Serves as seed expander and as the hash that
// derives independent sub-streams from (master seed, role, index).
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

enum class SeedRole : std::uint64_t {
  Matrix = 1,
  Signal = 2,
  SignalValues = 3,
  Noise = 4,
  Realization = 5,
};

// Sub-seed for (master, role, index). Realizations are reorderable: the seed a
// realization gets never depends on thread count or execution order.
inline std::uint64_t derive_seed(std::uint64_t master, SeedRole role, std::uint64_t index) {
  std::uint64_t s = master;
  s = splitmix64_next(s) ^ (static_cast<std::uint64_t>(role) * 0xd1342543de82ef95ULL);
  s = splitmix64_next(s) ^ (index * 0x2545f4914f6cdd1dULL);
  return splitmix64_next(s);
}

// xoshiro256++ (Blackman & Vigna). Hand-rolled so that streams are
// bit-reproducible across platforms and standard library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64_next(sm);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1]; never zero, safe under log().
  double uniform_open() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller; the spare sample is cached.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  // Unbiased integer in [0, bound) via masked rejection.
  std::uint64_t below(std::uint64_t bound) {
    std::uint64_t mask = ~std::uint64_t{0};
    std::uint64_t top = bound - 1;
    mask >>= 63;
    while (mask < top) mask = (mask << 1) | 1;
    for (;;) {
      const std::uint64_t v = next_u64() & mask;
      if (v < bound) return v;
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t state_[4] = {};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace bossamp
