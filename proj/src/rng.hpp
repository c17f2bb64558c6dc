#pragma once

#include <cstdint>
#include <random>

#include "bytes.hpp"

namespace lpsim {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seeded random source. Every random decision in a run is drawn from a fork
// of one master Rng, so a run is a pure function of the configured seed.
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), eng_(splitmix64(seed)) {}

  // Independent substream; `salt` distinguishes sibling forks.
  Rng fork(uint64_t salt) const { return Rng(splitmix64(seed_ ^ splitmix64(salt + 0x51ed270bULL))); }

  uint64_t u64() { return eng_(); }

  // Uniform in [0, 1).
  double real() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [lo, hi] inclusive.
  int64_t uniform_int(int64_t lo, int64_t hi) {
    uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    return lo + static_cast<int64_t>(u64() % span);
  }

  double uniform_real(double lo, double hi) { return lo + (hi - lo) * real(); }

  bool bernoulli(double p) { return real() < p; }

  Bytes bytes(size_t n) {
    Bytes out(n);
    size_t i = 0;
    while (i < n) {
      uint64_t v = u64();
      for (int k = 0; k < 8 && i < n; ++k, ++i) out[i] = static_cast<uint8_t>(v >> (8 * k));
    }
    return out;
  }

 private:
  uint64_t seed_;
  std::mt19937_64 eng_;
};

}  // namespace lpsim
