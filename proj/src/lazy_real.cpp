#include "trimlab/lazy_real.hpp"

namespace trimlab {

void LazyUniformReal::refine(std::size_t bits) {
  while (words_.size() * 64 < bits) words_.push_back(engine_());
}

bool LazyUniformReal::bit(std::size_t index) {
  return (word(index / 64) >> (63 - index % 64)) & 1U;
}

std::uint64_t LazyUniformReal::word(std::size_t index) {
  refine((index + 1) * 64);
  return words_[index];
}

std::uint64_t LazyUniformReal::bits_at(std::size_t position) {
  const std::size_t w = position / 64;
  const unsigned offset = position % 64;
  if (offset == 0) return word(w);
  return (word(w) << offset) | (word(w + 1) >> (64 - offset));
}

mpz_class LazyUniformReal::prefix(std::size_t bits) {
  const std::size_t full = (bits + 63) / 64;
  refine(full * 64);
  mpz_class k;
  if (full > 0) {
    mpz_import(k.get_mpz_t(), full, 1, sizeof(std::uint64_t), 0, 0, words_.data());
    mpz_fdiv_q_2exp(k.get_mpz_t(), k.get_mpz_t(), full * 64 - bits);
  }
  return k;
}

std::pair<mpq_class, mpq_class> LazyUniformReal::bounds(std::size_t bits) {
  const mpz_class k = prefix(bits);
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 2, bits);
  mpq_class lo(k, scale);
  mpq_class hi(mpz_class(k + 1), scale);
  lo.canonicalize();
  hi.canonicalize();
  return {lo, hi};
}

std::uint64_t sample_seed(std::uint64_t base_seed, std::uint64_t index) noexcept {
  std::uint64_t z = base_seed + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace trimlab
