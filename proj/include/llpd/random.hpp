#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace llpd {

// Seedable 64-bit generator. Uniform doubles are built directly from the
// top 53 bits and normals via Box-Muller, so a fixed (seed, stream) pair
// produces bit-identical output on any conforming implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Derives an independent stream, used to give each cluster of a
  // generator its own substream: stream i of seed s is seeded with
  // splitmix64(s + golden * (i + 1)).
  static Rng stream(std::uint64_t seed, std::uint64_t idx) {
    return Rng(splitmix64(seed + 0x9E3779B97F4A7C15ull * (idx + 1)));
  }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Standard normal (Box-Muller, two uniforms per call).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Rejection-free modulo is biased for huge n; n here is point counts,
    // far below 2^52, so scaling the 53-bit uniform is exact enough and
    // deterministic.
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) %
           n;
  }

  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace llpd
