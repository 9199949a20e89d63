#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace planar {

// splitmix64: platform-independent, deterministic given the seed.
inline uint64_t splitmix64(uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stateless hash of lattice coordinates for procedural textures.
inline uint64_t hash_coords(int64_t x, int64_t y, uint64_t seed) {
  uint64_t s = seed ^ (static_cast<uint64_t>(x) * 0x9e3779b97f4a7c15ULL) ^
               (static_cast<uint64_t>(y) * 0xc2b2ae3d27d4eb4fULL);
  return splitmix64(s);
}

// Small deterministic generator; avoids std distributions so results are
// identical across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next() { return splitmix64(state_); }

  double uniform() {  // [0, 1)
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(next() % static_cast<uint64_t>(hi - lo + 1));
  }

  double normal() {  // Box-Muller
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  Rng fork() { return Rng(next()); }

 private:
  uint64_t state_;
};

}  // namespace planar
