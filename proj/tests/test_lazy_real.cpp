#include <doctest.h>

#include "trimlab/lazy_real.hpp"

using trimlab::LazyUniformReal;

TEST_CASE("same seed replays the same bits") {
  LazyUniformReal a(42), b(42);
  for (std::size_t i = 0; i < 128; ++i) CHECK(a.bit(i) == b.bit(i));
  CHECK(a.prefix(128) == b.prefix(128));
}

TEST_CASE("seeds 1 and 2 differ in the first word") {
  LazyUniformReal a(1), b(2);
  CHECK(a.word(0) != b.word(0));
  // first outputs of mt19937_64 for these seeds
  CHECK(a.word(0) == 0x2245BD5FBB686F68ULL);
  CHECK(b.word(0) == 0xE75297ED09818A4CULL);
}

TEST_CASE("bounds nest under refinement") {
  for (std::uint64_t seed : {1ULL, 7ULL, 99ULL}) {
    LazyUniformReal x(seed);
    auto [lo32, hi32] = x.bounds(32);
    auto [lo64, hi64] = x.bounds(64);
    auto [lo200, hi200] = x.bounds(200);
    CHECK(lo32 <= lo64);
    CHECK(hi64 <= hi32);
    CHECK(lo64 <= lo200);
    CHECK(hi200 <= hi64);
    CHECK(hi64 - lo64 == mpq_class(1, 1) / mpq_class(mpz_class(1) << 64));
  }
}

TEST_CASE("bits_at agrees with single bits across word boundaries") {
  LazyUniformReal x(5);
  for (std::size_t pos : {0UL, 1UL, 37UL, 63UL, 64UL, 100UL}) {
    const std::uint64_t w = x.bits_at(pos);
    for (std::size_t k = 0; k < 64; ++k) CHECK(((w >> (63 - k)) & 1) == (x.bit(pos + k) ? 1U : 0U));
  }
}

TEST_CASE("prefix reads the leading bits as an integer") {
  LazyUniformReal x(3);
  mpz_class k = 0;
  for (std::size_t i = 0; i < 70; ++i) k = 2 * k + (x.bit(i) ? 1 : 0);
  CHECK(x.prefix(70) == k);
  CHECK(x.refined_len() % 64 == 0);
}

TEST_CASE("sample seeds are distinct and reproducible") {
  CHECK(trimlab::sample_seed(1, 0) == trimlab::sample_seed(1, 0));
  CHECK(trimlab::sample_seed(1, 0) != trimlab::sample_seed(1, 1));
  CHECK(trimlab::sample_seed(1, 0) != trimlab::sample_seed(2, 0));
}
