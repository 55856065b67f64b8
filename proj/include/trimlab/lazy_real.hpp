#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace trimlab {

/// A uniform random real in (0,1) that reveals its binary expansion on
/// demand.
///
/// Bit 0 is the first digit after the binary point. Bits come from a
/// std::mt19937_64 seeded with `seed`, one 64-bit word at a time, so the
/// expansion is fully determined by the seed. The real is never a dyadic
/// rational: conceptually a 1-bit is appended past every finite prefix, so
/// after P bits the value lies in the open interval (k/2^P, (k+1)/2^P).
class LazyUniformReal {
 public:
  explicit LazyUniformReal(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  /// Number of bits generated so far (always a multiple of 64).
  std::size_t refined_len() const noexcept { return words_.size() * 64; }

  /// Makes sure at least `bits` bits exist.
  void refine(std::size_t bits);

  bool bit(std::size_t index);

  /// The 64-bit word holding bits [64*index, 64*index + 64), most significant first.
  std::uint64_t word(std::size_t index);

  /// 64 bits starting at an arbitrary bit position.
  std::uint64_t bits_at(std::size_t position);

  /// The integer k whose binary digits are the first `bits` bits.
  mpz_class prefix(std::size_t bits);

  /// Rational bracket [k/2^P, (k+1)/2^P] after P bits.
  std::pair<mpq_class, mpq_class> bounds(std::size_t bits);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::vector<std::uint64_t> words_;
};

/// Derives the seed of sample `index` from a base seed (splitmix64 finalizer
/// applied to base + (index + 1) * 0x9E3779B97F4A7C15).
std::uint64_t sample_seed(std::uint64_t base_seed, std::uint64_t index) noexcept;

}  // namespace trimlab
