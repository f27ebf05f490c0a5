#pragma once

#include <cstdint>

#include "rawcode/rational.hpp"

namespace rawcode {

/// Identifier of the random-stream layout. Any change to `mix64`,
/// `stream_key` or `CounterRng::word` must bump this string, since reports
/// and frozen test values depend on the exact bits produced.
inline constexpr const char* kRngVersion = "splitmix64-counter/v1";

/// SplitMix64 output finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

/// (master seed, stream index) pair naming one independent substream.
struct SeedSpec {
  std::uint64_t master = 0;
  std::uint64_t stream = 0;

  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

/// Key of the substream: mix64(mix64(master) ^ (stream * C1 + C2)).
constexpr std::uint64_t stream_key(const SeedSpec& seed) noexcept {
  return mix64(mix64(seed.master) ^ (seed.stream * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
}

/// Counter-based generator: output i of a stream is
/// mix64(key + (i + 1) * golden), i.e. SplitMix64 seeded with the stream key.
/// Random access by counter makes the stream re-readable without buffering.
class CounterRng {
public:
  CounterRng() = default;
  explicit CounterRng(const SeedSpec& seed) : key_(stream_key(seed)) {}

  static constexpr std::uint64_t word(std::uint64_t key, std::uint64_t index) noexcept {
    return mix64(key + (index + 1) * kGolden);
  }
  std::uint64_t word(std::uint64_t index) const noexcept { return word(key_, index); }

  std::uint64_t next_u64() noexcept { return word(key_, counter_++); }

  /// Uniform double in [0,1) from the top 53 bits.
  double next_double() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Exactly uniform integer in [0, bound) by rejection.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw DomainError("below(0)");
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    for (;;) {
      std::uint64_t v = next_u64();
      if (v < limit) return v % bound;
    }
  }

  /// Exactly uniform integer in [0, bound) for arbitrary-size bounds.
  BigInt below(const BigInt& bound) {
    if (bound <= 0) throw DomainError("below(<=0)");
    const size_t bits = mpz_sizeinbase(bound.get_mpz_t(), 2);
    const size_t words = (bits + 63) / 64;
    for (;;) {
      BigInt v = 0;
      for (size_t i = 0; i < words; ++i) {
        v <<= 64;
        v += from_u64(next_u64());
      }
      v >>= static_cast<mp_bitcnt_t>(words * 64 - bits);
      if (v < bound) return v;
    }
  }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

} // namespace rawcode
