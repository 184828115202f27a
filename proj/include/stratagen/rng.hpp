#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace stratagen {

/// 64-bit FNV-1a. Stable across platforms and runs.
std::uint64_t stableHash(std::string_view text);

std::uint64_t splitmix64(std::uint64_t x);

/// One deterministic random stream. Distributions are implemented here
/// rather than with <random> adaptors so values do not depend on the
/// standard library in use.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, n); n must be non-zero.
  std::uint64_t below(std::uint64_t n);
  /// Uniform in [lo, hi].
  std::int64_t between(std::int64_t lo, std::int64_t hi);
  /// Uniform in [0, 1).
  double unit();

  template <typename T>
  const T& pick(std::span<const T> items) {
    return items[below(items.size())];
  }

 private:
  std::mt19937_64 engine_;
};

/// Root of all randomness in a run. Substreams are derived from a label
/// (normally a rendered component path), so the values a component sees do
/// not depend on the order in which components are processed.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t globalSeed) : seed_(globalSeed) {}

  std::uint64_t seed() const { return seed_; }
  RandomStream streamFor(std::string_view label) const;

 private:
  std::uint64_t seed_;
};

}  // namespace stratagen
