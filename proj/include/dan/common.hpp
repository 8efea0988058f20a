// Copyright 2026 The dansim Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dan {

using tick_t = std::int64_t;
using ydr_t = std::int64_t;   // smallest YDR unit, integer arithmetic only
using address = std::string;  // "0x" + 16 hex digits

/// Base class for all domain errors raised by the simulator.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Hashing / seeding

constexpr std::uint64_t fnv1a64(std::string_view s,
                                std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

constexpr std::uint64_t fnv1a64_u64(std::uint64_t v,
                                    std::uint64_t h = 0xcbf29ce484222325ull) {
  for (int i = 0; i < 8; ++i) {
    h ^= v & 0xff;
    h *= 0x100000001b3ull;
    v >>= 8;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// ---------------------------------------------------------------------------
// Deterministic random streams.
//
// All distributions are implemented explicitly on top of mt19937_64 so that
// sequences do not depend on the standard library's distribution internals.
// A named substream derives its seed from (master, name), so adding a new
// consumer never perturbs the draws of existing ones.

class rng {
 public:
  explicit rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform in [0,1) with 53 random bits.
  double next_unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * next_unit(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_int(std::uint64_t n) {
    // Lemire's multiply-shift; slight modulo bias is irrelevant here but this
    // stays exactly reproducible everywhere.
    unsigned __int128 m = static_cast<unsigned __int128>(eng_()) * n;
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Uniform integer in [a, b] inclusive.
  std::int64_t uniform_i64(std::int64_t a, std::int64_t b) {
    return a + static_cast<std::int64_t>(
                   uniform_int(static_cast<std::uint64_t>(b - a + 1)));
  }

  bool bernoulli(double p) { return next_unit() < p; }

  /// Box-Muller without spare caching: two draws per sample.
  double normal(double mean = 0.0, double stddev = 1.0) {
    double u1 = next_unit();
    double u2 = next_unit();
    while (u1 <= 0.0) u1 = next_unit();
    double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(6.283185307179586476925286766559 * u2);
  }

  double exponential(double rate) {
    double u = next_unit();
    while (u <= 0.0) u = next_unit();
    return -std::log(u) / rate;
  }

  /// Poisson by inversion (rates used here are small).
  std::uint64_t poisson(double lambda) {
    double l = std::exp(-lambda);
    double p = 1.0;
    std::uint64_t k = 0;
    do {
      ++k;
      p *= next_unit();
    } while (p > l);
    return k - 1;
  }

 private:
  std::mt19937_64 eng_;
};

inline rng substream(std::uint64_t master, std::string_view name) {
  return rng(splitmix64(master ^ fnv1a64(name)));
}

// ---------------------------------------------------------------------------
// Formatting helpers (used by all exporters; shortest round-trip form keeps
// artifact files byte-stable across runs).

inline std::string fmt_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

inline std::string hex16(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

/// Wallet addresses are a bijective scramble of the token id, so uniqueness
/// of ids carries over to addresses.
inline address address_for_token(std::uint64_t token_id) {
  return "0x" + hex16(splitmix64(token_id));
}

}  // namespace dan
