#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "trimlab/dynamics.hpp"
#include "trimlab/error.hpp"
#include "trimlab/mainterm.hpp"
#include "trimlab/system_model.hpp"

using namespace trimlab;

namespace {

std::int64_t inverse_fraction_oracle(const mpq_class& x, std::size_t n) {
  mpq_class y = x * mpq_class(mpz_class(1) << static_cast<mp_bitcnt_t>(n));
  mpz_class whole;
  mpz_fdiv_q(whole.get_mpz_t(), y.get_num_mpz_t(), y.get_den_mpz_t());
  y -= whole;
  const mpq_class inv = 1 / y;
  mpz_fdiv_q(whole.get_mpz_t(), inv.get_num_mpz_t(), inv.get_den_mpz_t());
  return whole.get_si();
}

}  // namespace

TEST_CASE("doubling orbit of exact points") {
  CHECK(doubling_orbit(mpq_class(5, 16), 2).values == std::vector<std::int64_t>{3, 1});
  CHECK(doubling_orbit(mpq_class(1, 3), 3).values == std::vector<std::int64_t>{3, 1, 3});
  CHECK(doubling_orbit(mpq_class(1, 3), 3).symbols == std::vector<std::int64_t>{0, 1, 0});
  CHECK_THROWS_AS(doubling_orbit(mpq_class(5, 16), 5), Error);
}

TEST_CASE("doubling orbit of a dyadic point matches direct evaluation") {
  LazyUniformReal bits(8);
  const std::size_t p = 300;
  const mpq_class x(2 * bits.prefix(p) + 1, mpz_class(1) << (p + 1));
  const OrbitDigits d = doubling_orbit(x, p);
  for (std::size_t n = 0; n < p; ++n) CHECK(d.values[n] == inverse_fraction_oracle(x, n));
}

TEST_CASE("random doubling orbits are certified on the revealed interval") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    LazyUniformReal x(seed);
    const std::size_t n = 400;
    const OrbitDigits d = doubling_orbit(x, n);
    CHECK(d.exact);
    CHECK(d.bits_used <= default_bit_budget(n));
    const auto [lo, hi] = x.bounds(d.bits_used);
    for (std::size_t k = 0; k < n; ++k) {
      CHECK(d.values[k] == inverse_fraction_oracle(hi, k));
      CHECK(d.symbols[k] == (x.bit(k) ? 1 : 0));
    }
  }
}

TEST_CASE("cylinder measures") {
  const SystemModel level1 = SystemModel::doubling_indicator();
  const std::vector<std::int64_t> w0{0}, w01{0, 1};
  CHECK(*cylinder_measure(level1, w0).exact == mpq_class(1, 2));
  CHECK(*cylinder_measure(level1, w01).exact == mpq_class(1, 4));
  const std::vector<std::int64_t> g1{1};
  CHECK(cylinder_measure(SystemModel::gauss(), g1).value == doctest::Approx(0.415037).epsilon(1e-6));
  const std::vector<std::int64_t> bad{2};
  CHECK_THROWS_AS(cylinder_measure(level1, bad), Error);
}

TEST_CASE("gauss measure of intervals") {
  CHECK(gauss_measure(0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(gauss_measure(0.0, 0.5) == doctest::Approx(0.584963).epsilon(1e-6));
  CHECK(gauss_measure(0.3, 0.3) == 0.0);
  CHECK(gauss_measure(mpq_class(0), mpq_class(1, 2)) == doctest::Approx(std::log(1.5) / std::numbers::ln2));
  CHECK_THROWS_AS(gauss_measure(0.6, 0.5), Error);
  CHECK_THROWS_AS(gauss_measure(-0.1, 0.5), Error);
}

TEST_CASE("doubling and Markov cylinder measures are additive") {
  Matrix<mpq_class> p(3, 3);
  p << mpq_class(1, 2), mpq_class(1, 3), mpq_class(1, 6), mpq_class(1, 4), mpq_class(1, 4), mpq_class(1, 2),
      mpq_class(0), mpq_class(2, 3), mpq_class(1, 3);
  const SystemModel markov = SystemModel::markov(p, {0, 1, 5});
  const SystemModel doubling = SystemModel::doubling_indicator();
  for (const auto& word : std::vector<std::vector<std::int64_t>>{{0}, {1, 2}, {2, 1, 0}, {0, 0, 2, 1}}) {
    mpq_class total = 0;
    for (std::int64_t s = 0; s < 3; ++s) {
      auto longer = word;
      longer.push_back(s);
      total += *cylinder_measure(markov, longer).exact;
    }
    CHECK(total == *cylinder_measure(markov, word).exact);
  }
  for (const auto& word : std::vector<std::vector<std::int64_t>>{{0}, {1, 0}, {1, 1, 0, 1}}) {
    auto w0 = word, w1 = word;
    w0.push_back(0);
    w1.push_back(1);
    CHECK(*cylinder_measure(doubling, w0).exact + *cylinder_measure(doubling, w1).exact ==
          *cylinder_measure(doubling, word).exact);
  }
}

TEST_CASE("Gauss cylinder measures are additive up to a closed-form tail") {
  const SystemModel gauss = SystemModel::gauss();
  for (const auto& word : std::vector<std::vector<std::int64_t>>{{1}, {3, 1}, {2, 5, 1}}) {
    const std::int64_t m = 20000;
    double total = 0;
    for (std::int64_t s = 1; s <= m; ++s) {
      auto longer = word;
      longer.push_back(s);
      total += cylinder_measure(gauss, longer).value;
    }
    // the digits beyond m fill the interval between [word, m+1] and [word, inf)
    auto tail_word = word;
    tail_word.push_back(m + 1);
    const auto [a, b] = gauss_cylinder_interval(tail_word);
    const mpq_class limit = convergent(word);
    const mpq_class lo = std::min(limit, std::min(a, b));
    const mpq_class hi = std::max(limit, std::max(a, b));
    total += gauss_measure(lo, hi);
    CHECK(total == doctest::Approx(cylinder_measure(gauss, word).value).epsilon(1e-10));
  }
}

TEST_CASE("orbit dispatch follows the system") {
  LazyUniformReal x(4);
  const SystemModel cylinders = SystemModel::doubling_cylinders(2, {5, 6, 7, 8});
  const OrbitDigits d = orbit(cylinders, x, 100);
  for (std::size_t n = 0; n < 100; ++n) {
    const std::int64_t word = (x.bit(n) ? 2 : 0) + (x.bit(n + 1) ? 1 : 0);
    CHECK(d.symbols[n] == word);
    CHECK(d.values[n] == 5 + word);
  }
  LazyUniformReal y(4);
  const OrbitDigits inverse = orbit(SystemModel::doubling_inverse_fraction(), y, 50);
  CHECK(inverse.symbols == inverse.values);
  LazyUniformReal z(4);
  CHECK_THROWS_AS(orbit(SystemModel::table({1.0}, {1}, 0.0, 0), z, 5), Error);
}

TEST_CASE("Markov orbits visit states at stationary frequencies") {
  Matrix<mpq_class> p(2, 2);
  p << mpq_class(9, 10), mpq_class(1, 10), mpq_class(1, 2), mpq_class(1, 2);
  const SystemModel chain = SystemModel::markov(p, {0, 1});
  CHECK(chain.stationary()(0) == mpq_class(5, 6));
  LazyUniformReal x(17);
  const OrbitDigits d = orbit(chain, x, 60000);
  double ones = 0;
  for (const auto s : d.symbols) ones += static_cast<double>(s);
  CHECK(ones / 60000.0 == doctest::Approx(1.0 / 6.0).epsilon(0.1));
  for (std::size_t n = 0; n < d.symbols.size(); ++n) CHECK(d.values[n] == d.symbols[n]);
}

TEST_CASE("system models validate their input") {
  Matrix<mpq_class> not_stochastic(2, 2);
  not_stochastic << mpq_class(1, 2), mpq_class(1, 3), mpq_class(1, 2), mpq_class(1, 2);
  CHECK_THROWS_AS(SystemModel::markov(not_stochastic, {0, 1}), Error);
  CHECK_THROWS_AS(SystemModel::doubling_cylinders(2, {1, 2, 3}), Error);
  CHECK_THROWS_AS(SystemModel::doubling_cylinders(1, {1, -2}), Error);
  CHECK_THROWS_AS(SystemModel::table({0.5, 0.4}, {1, 2}, 0.0, 0), Error);
  CHECK_NOTHROW(SystemModel::table({0.5, 0.4}, {1, 2}, 0.1, 3));
  const SystemModel gauss = SystemModel::gauss();
  CHECK_FALSE(gauss.cell_count().has_value());
  CHECK(gauss.cell_measure(2).value == doctest::Approx(gauss_digit_probability(2)));
  CHECK_THROWS_AS(gauss.cell_measure(0), Error);
  CHECK(*SystemModel::doubling_indicator().exact_mean() == mpq_class(1, 2));
}
