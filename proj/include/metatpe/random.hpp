#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>

namespace metatpe {

// Deterministic random stream with key-based forking.
//
// A stream is identified by a 64-bit key; `fork(tag)` derives a child stream
// from the key alone, so children are reproducible no matter how many draws
// the parent has made. All draws go through our own uniform so sequences are
// identical across standard-library implementations.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : key_(mix(seed)), engine_(key_) {}

  // Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound). bound must be positive.
  std::uint64_t uniform_int(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("uniform_int needs a positive bound");
    const std::uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
    std::uint64_t x = engine_();
    while (x < threshold) {
      x = engine_();
    }
    return x % bound;
  }

  // Standard normal via Box-Muller.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

  // Child stream derived from this stream's key and `tag`. Independent of
  // draw position; fork(a) != fork(b) for a != b.
  RandomStream fork(std::uint64_t tag) const {
    return RandomStream(key_ ^ mix(tag + 0x51ed2701b5a3c96dULL));
  }

  std::uint64_t key() const { return key_; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    // splitmix64 finalizer
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::mt19937_64 engine_;
};

}  // namespace metatpe
