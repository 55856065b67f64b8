#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "trimlab/lazy_real.hpp"
#include "trimlab/rational.hpp"
#include "trimlab/system_model.hpp"

namespace trimlab {

/// The first N orbit symbols of a point and the observable along them.
struct OrbitDigits {
  std::vector<std::int64_t> symbols;
  std::vector<std::int64_t> values;
  bool exact = true;
  /// Random bits consumed from the generating real (0 for exact test inputs).
  std::size_t bits_used = 0;
};

inline constexpr std::size_t default_bit_budget(std::size_t n) noexcept { return 64 * n + 4096; }

LazyUniformReal sample_real(std::uint64_t seed);

/// Continued-fraction digits a_1..a_N of x (the integer part a_0 is dropped).
///
/// The real is held as the open dyadic interval given by its revealed bits.
/// Both endpoints go through the Euclidean algorithm together and a digit is
/// emitted only when every point of the interval agrees on it; otherwise
/// more bits are revealed. Runs of digits are computed on 124-bit leading
/// parts with rigorous interval bounds and then applied to the full
/// integers in one pass (Lehmer's method).
OrbitDigits gauss_digits(LazyUniformReal& x, std::size_t n,
                         std::optional<std::size_t> bit_budget = std::nullopt);

/// Test hook for exact rationals. Throws expansion_terminated if the
/// expansion of frac(x) is shorter than n.
OrbitDigits gauss_digits(const mpq_class& x, std::size_t n);

/// Test hook for quadratic irrationals (p + r sqrt(d)) / q.
OrbitDigits gauss_digits(const QuadraticIrrational& x, std::size_t n);

/// [a_0; a_1, ..., a_k] as an exact rational.
mpq_class convergent(std::span<const std::int64_t> digits, const mpz_class& integer_part = 0);

/// Binary digits of T^n x and the values floor(1 / {2^n x}) for n < N,
/// each floor certified from exact bounds.
OrbitDigits doubling_orbit(LazyUniformReal& x, std::size_t n,
                           std::optional<std::size_t> bit_budget = std::nullopt);

/// Test hook; throws invalid_argument if {2^n x} hits 0 before n.
OrbitDigits doubling_orbit(const mpq_class& x, std::size_t n);

/// Orbit of x through the system's partition: symbols are cell indices and
/// values the observable on those cells.
OrbitDigits orbit(const SystemModel& system, LazyUniformReal& x, std::size_t n,
                  std::optional<std::size_t> bit_budget = std::nullopt);

/// Measure of the cylinder of points whose first orbit symbols are `word`.
/// Doubling words are binary digits, Markov words are states, Gauss words
/// are continued-fraction digits.
Measure cylinder_measure(const SystemModel& system, std::span<const std::int64_t> word);

/// Closed interval [a, b] of a Gauss cylinder (as exact rationals).
std::pair<mpq_class, mpq_class> gauss_cylinder_interval(std::span<const std::int64_t> word);

/// mu_g([a, b]) = (ln(1+b) - ln(1+a)) / ln 2.
double gauss_measure(double a, double b);
double gauss_measure(const mpq_class& a, const mpq_class& b);

}  // namespace trimlab
