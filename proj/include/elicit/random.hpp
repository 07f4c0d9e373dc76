#pragma once

// xoshiro256** seeded through SplitMix64. Independent streams come from the
// generator's jump function (2^128 steps apart), so stream k of a seed is
// reproducible regardless of what other streams are used for.

#include <array>
#include <cmath>
#include <cstdint>

#include "elicit/errors.hpp"
#include "elicit/numerics/special_functions.hpp"

namespace elicit::random {

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed, unsigned stream = 0) {
    SplitMix64 sm(seed);
    for (auto& word : s_) word = sm.next();
    for (unsigned i = 0; i < stream; ++i) jump();
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Equivalent to 2^128 calls.
  void jump() {
    static constexpr std::array<std::uint64_t, 4> kJump{0x180ec6d33cfd0abaULL, 0xd5a61266f0c9392cULL,
                                                        0xa9582618e03fc9aaULL, 0x39abdc4529b1661cULL};
    std::array<std::uint64_t, 4> acc{};
    for (std::uint64_t word : kJump) {
      for (int b = 0; b < 64; ++b) {
        if (word & (std::uint64_t{1} << b)) {
          for (int i = 0; i < 4; ++i) acc[i] ^= s_[i];
        }
        (*this)();
      }
    }
    s_ = acc;
  }

  friend bool operator==(const Xoshiro256&, const Xoshiro256&) = default;

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::array<std::uint64_t, 4> s_{};
};

// Uniform on the open interval (0, 1): the 53-bit grid shifted by half a step.
inline double uniform_open(Xoshiro256& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

// Standard normal by inversion.
inline double standard_normal(Xoshiro256& rng) { return numerics::standard_normal_quantile(uniform_open(rng)); }

// Gamma(shape, 1) by Marsaglia and Tsang; for shape < 1 draw at shape + 1
// and multiply by U^(1/shape).
inline double standard_gamma(Xoshiro256& rng, double shape) {
  elicit::detail::require_domain(shape > 0.0 && std::isfinite(shape), "gamma variate: shape must be positive");
  if (shape < 1.0) {
    const double boost = std::pow(uniform_open(rng), 1.0 / shape);
    return standard_gamma(rng, shape + 1.0) * boost;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double z;
    double v;
    do {
      z = standard_normal(rng);
      v = 1.0 + c * z;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_open(rng);
    if (u < 1.0 - 0.0331 * z * z * z * z) return d * v;
    if (std::log(u) < 0.5 * z * z + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace elicit::random
