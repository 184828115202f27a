#include "stratagen/rng.hpp"

#include <limits>

namespace stratagen {

std::uint64_t stableHash(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t RandomStream::below(std::uint64_t n) {
  // Rejection keeps the draw unbiased.
  const std::uint64_t threshold = (0 - n) % n;
  while (true) {
    std::uint64_t r = engine_();
    if (r >= threshold) return r % n;
  }
}

std::int64_t RandomStream::between(std::int64_t lo, std::int64_t hi) {
  if (lo >= hi) return lo;
  const std::uint64_t span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
  if (span == std::numeric_limits<std::uint64_t>::max()) return static_cast<std::int64_t>(engine_());
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + below(span + 1));
}

double RandomStream::unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

RandomStream SeededRng::streamFor(std::string_view label) const {
  return RandomStream(splitmix64(seed_ ^ splitmix64(stableHash(label))));
}

}  // namespace stratagen
