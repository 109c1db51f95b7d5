#pragma once

#include <complex>
#include <cstdint>
#include <string_view>

namespace llrq {

// Splittable counter-based random stream (SplitMix64 core). Child streams are
// derived from the parent's seed and a label, never from consumed state, so
// parallel and serial runs draw identical sequences per (seed, label, index).
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), state_(seed) {}

  // Pure function of (seed, label, index); does not advance this stream.
  RngStream derive(std::string_view label, std::uint64_t index = 0) const {
    std::uint64_t h = fnv1a(label);
    return RngStream(mix(mix(seed_ ^ h) + index));
  }

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix(state_);
  }

  // Uniform in [0, 1).
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; second variate of each pair is cached.
  double next_gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the log is finite
    double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    double u2 = next_unit();
    double rad = std::sqrt(-2.0 * std::log(u1));
    double ang = 6.283185307179586476925286766559 * u2;
    spare_ = rad * std::sin(ang);
    has_spare_ = true;
    return rad * std::cos(ang);
  }

  // Circularly-symmetric complex Gaussian CN(0, variance).
  std::complex<double> next_cgaussian(double variance) {
    double s = std::sqrt(variance * 0.5);
    double re = next_gaussian();
    double im = next_gaussian();
    return {s * re, s * im};
  }

  static constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ull;
    }
    return h;
  }

 private:
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace llrq
