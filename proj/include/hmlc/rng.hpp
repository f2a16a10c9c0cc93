#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

// Counter-based keyed randomness. Every random quantity in the toolkit is a pure
// function of a (seed, tag, ...keys) tuple, so results never depend on draw order,
// thread count, or global state.
namespace hmlc::rng {

inline constexpr uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

inline uint64_t mix64(uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

inline uint64_t combine(uint64_t a, uint64_t b) { return mix64(a + kGamma + mix64(b)); }

inline uint64_t hash_str(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline uint64_t key(uint64_t seed, std::string_view tag) { return combine(seed, hash_str(tag)); }
inline uint64_t key(uint64_t seed, std::string_view tag, uint64_t a) {
  return combine(key(seed, tag), a);
}
inline uint64_t key(uint64_t seed, std::string_view tag, uint64_t a, uint64_t b) {
  return combine(key(seed, tag, a), b);
}

// Uniform in [0, 1) from a single hashed word.
inline double u01(uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

// SplitMix64 stream seeded by a key.
class Stream {
 public:
  explicit Stream(uint64_t k) : state_(k) {}

  uint64_t next() {
    state_ += kGamma;
    return mix64(state_);
  }

  double uniform() { return u01(next()); }

  // Unbiased-enough bounded draw via 128-bit multiply; deterministic.
  uint64_t bounded(uint64_t n) {
    return static_cast<uint64_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  double uniform_in(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    // Box-Muller; u1 in (0,1] so the log is finite.
    double u1 = static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  uint64_t state_;
};

}  // namespace hmlc::rng
