// Copyright (c) 2026 tilekit contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace tilekit {

/**
 * @brief Small deterministic RNG with content-keyed seeding.
 *
 * splitmix64 core with hand-rolled gaussian/poisson draws. The standard
 * <random> distributions are implementation-defined, which would make
 * simulated outputs differ across standard libraries; everything here is
 * pinned so identical (seed, key) pairs give identical streams on any
 * platform. Streams are derived from content identifiers, never from call
 * order, so results are independent of evaluation order and thread count.
 */
class Rng {
 public:
  explicit Rng(std::uint64_t state) : state_(state) {}

  /// Derive an independent stream from a seed plus string/integer key parts.
  template <typename... Parts>
  static Rng keyed(std::uint64_t seed, const Parts&... parts) {
    std::uint64_t h = kFnvOffset;
    mix_u64(h, seed);
    (mix_part(h, parts), ...);
    // One splitmix round so nearby keys land far apart.
    return Rng(splitmix(h));
  }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

  /// Uniform integer in [lo, hi] inclusive. Modulo bias is negligible for
  /// the small ranges used here.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(next_u64() % span);
  }

  /// Standard normal via Box-Muller (consumes two uniforms).
  double gauss() {
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Poisson-distributed count (Knuth). Intended for small means.
  int poisson(double mean) {
    if (mean <= 0.0) return 0;
    const double limit = std::exp(-mean);
    int k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > limit && k < 1000000);
    return k - 1;
  }

 private:
  static constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
  static constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

  static void mix_byte(std::uint64_t& h, unsigned char b) {
    h ^= b;
    h *= kFnvPrime;
  }

  static void mix_u64(std::uint64_t& h, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) mix_byte(h, static_cast<unsigned char>(v >> (8 * i)));
  }

  static void mix_part(std::uint64_t& h, std::string_view s) {
    for (char c : s) mix_byte(h, static_cast<unsigned char>(c));
    mix_byte(h, 0xFF);  // separator so ("ab","c") != ("a","bc")
  }

  static void mix_part(std::uint64_t& h, const std::string& s) {
    mix_part(h, std::string_view(s));
  }

  static void mix_part(std::uint64_t& h, const char* s) { mix_part(h, std::string_view(s)); }

  template <typename T>
  static std::enable_if_t<std::is_integral_v<T>> mix_part(std::uint64_t& h, T v) {
    mix_u64(h, static_cast<std::uint64_t>(static_cast<std::int64_t>(v)));
  }

  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

  std::uint64_t state_;
};

}  // namespace tilekit
