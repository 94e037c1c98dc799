#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace hals {

[[noreturn]] inline void fail(const std::string& msg) {
  throw std::runtime_error(msg);
}

// Invariant / argument checking used across the library. Violations throw
// std::runtime_error; the CLI maps them to exit code 2.
#define HALS_CHECK(cond, msg)                 \
  do {                                        \
    if (!(cond)) ::hals::fail((msg));         \
  } while (0)

// Deterministic PRNG (xoshiro256** seeded via splitmix64). Used instead of
// <random> distributions so that identical seeds produce identical streams
// on every platform and standard library.
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t x = seed;
    for (auto& word : state_) {
      x += 0x9e3779b97f4a7c15ULL;
      uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      word = z ^ (z >> 31);
    }
  }

  uint64_t next() {
    const uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform double in [0, 1).
  double uniform() { return double(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Inclusive integer range.
  int uniform_int(int lo, int hi) {
    HALS_CHECK(hi >= lo, "uniform_int: empty range");
    return lo + int(next() % uint64_t(hi - lo + 1));
  }

  // Index in [0, n).
  size_t index(size_t n) {
    HALS_CHECK(n > 0, "Rng::index: n must be positive");
    return size_t(next() % uint64_t(n));
  }

 private:
  static uint64_t rotl(uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }
  std::array<uint64_t, 4> state_;
};

// Mixes several seed components into one 64-bit seed (for per-step /
// per-frame derived streams).
inline uint64_t mix_seed(uint64_t a, uint64_t b, uint64_t c = 0) {
  uint64_t h = a * 0x9e3779b97f4a7c15ULL;
  h ^= b + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  h *= 0xbf58476d1ce4e5b9ULL;
  h ^= c + 0x94d049bb133111ebULL + (h << 6) + (h >> 2);
  h ^= h >> 31;
  return h;
}

}  // namespace hals
