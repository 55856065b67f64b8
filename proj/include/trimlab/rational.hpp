#pragma once

// Exact arithmetic helpers on top of gmpxx, plus the Eigen glue that lets
// mpq_class act as a matrix scalar.

#include <gmpxx.h>

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <string_view>

namespace Eigen {

template <>
struct NumTraits<mpq_class> : GenericNumTraits<mpq_class> {
  using Real = mpq_class;
  using NonInteger = mpq_class;
  using Nested = mpq_class;
  using Literal = mpq_class;

  enum {
    IsInteger = 0,
    IsSigned = 1,
    IsComplex = 0,
    RequireInitialization = 1,
    ReadCost = 6,
    AddCost = 150,
    MulCost = 100
  };

  static inline Real epsilon() { return 0; }
  static inline Real dummy_precision() { return 0; }
  static inline int digits10() { return 0; }
};

}  // namespace Eigen

namespace trimlab {

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <class Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

/// Parses "p/q", "p" or a finite decimal "1.25" into an exact rational.
mpq_class parse_rational(std::string_view text);

std::string to_string(const mpq_class& q);

/// Natural log of a positive rational, accurate for huge numerators and
/// denominators.
double log_rational(const mpq_class& q);

/// ln(1 + q) for q > -1, accurate when q is tiny.
double log1p_rational(const mpq_class& q);

/// (p + r*sqrt(d)) / q with d > 0 not a perfect square.
struct QuadraticIrrational {
  std::int64_t p = 0;
  std::int64_t r = 1;
  std::int64_t d = 5;
  std::int64_t q = 1;
};

/// Parses "p,r,d,q".
QuadraticIrrational parse_quadratic(std::string_view text);

}  // namespace trimlab
