#pragma once

// Reproducible random streams.
//
// Every random quantity in the library is drawn from an Xoshiro256** engine
// whose state is derived, through SplitMix64, from a user seed and a tuple of
// integer stream identifiers (study, cell, replication, ...). A stream therefore
// depends only on its identifiers and never on execution order or worker count.
// Distributions are implemented here rather than taken from <random> because the
// standard distributions are not specified bit-for-bit across library vendors.

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numbers>

namespace qcheck {

/// SplitMix64 step; used for seeding and for mixing stream identifiers.
constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derive a child seed from a parent seed and a path of stream identifiers.
constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                    std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t state = seed;
  std::uint64_t out = splitmix64(state);
  for (std::uint64_t id : path) {
    state = out ^ (id * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
    out = splitmix64(state);
  }
  return out;
}

/// Bit pattern of a double, usable as a stream identifier.
inline std::uint64_t stream_id(double value) noexcept {
  return std::bit_cast<std::uint64_t>(value == 0.0 ? 0.0 : value);
}

/// Xoshiro256** engine. Satisfies UniformRandomBitGenerator.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed = 0) noexcept {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    const std::uint64_t result = std::rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = std::rotl(s_[3], 45);
    return result;
  }

 private:
  std::array<std::uint64_t, 4> s_{};
};

/// Engine plus the handful of portable distributions the library needs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept : engine_(seed) {}
  Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept
      : engine_(derive_seed(seed, path)) {}

  std::uint64_t bits() noexcept { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on [a, b).
  double uniform(double a, double b) noexcept { return a + (b - a) * uniform(); }

  /// Standard normal by Box-Muller; always consumes exactly two uniforms.
  double normal() noexcept {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// True with probability p.
  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Uniform integer in [0, n), n >= 1 (Lemire's multiply-shift with rejection).
  std::uint64_t index(std::uint64_t n) noexcept {
    __uint128_t m = static_cast<__uint128_t>(engine_()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<__uint128_t>(engine_()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

 private:
  Xoshiro256 engine_;
};

}  // namespace qcheck
