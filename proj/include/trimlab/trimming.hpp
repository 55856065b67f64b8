#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <type_traits>
#include <vector>

#include "trimlab/error.hpp"
#include "trimlab/lazy_real.hpp"
#include "trimlab/mainterm.hpp"
#include "trimlab/rational.hpp"
#include "trimlab/system_model.hpp"

namespace trimlab {

/// Birkhoff sum over a horizon with at most its largest term removed.
template <class Scalar>
struct TrimmedSum {
  std::int64_t horizon = 0;
  Scalar raw_sum{0};
  Scalar max_term{0};
  std::int64_t argmax = -1;
  int delta = 0;
  std::int64_t exceedances = 0;
  Scalar trimmed_sum{0};
};

namespace detail {

template <class Scalar>
void check_non_negative(const Scalar& v) {
  if (v < Scalar(0)) throw Error(Errc::negative_value, "observable values must be >= 0");
}

/// v > threshold, exact for integer values.
template <class Scalar>
bool exceeds(const Scalar& v, double threshold) {
  if constexpr (std::is_integral_v<Scalar>) {
    if (!(threshold < 9.2e18)) return false;
    if (threshold < 0) return true;
    return v > static_cast<Scalar>(std::floor(threshold));
  } else if constexpr (std::is_floating_point_v<Scalar>) {
    return v > threshold;
  } else {
    return v > Scalar(threshold);
  }
}

template <class Scalar>
Scalar checked_add(const Scalar& a, const Scalar& b) {
  if constexpr (std::is_integral_v<Scalar>) {
    Scalar out;
    if (__builtin_add_overflow(a, b, &out)) {
      throw Error(Errc::digit_overflow, "Birkhoff sum overflows 64 bits");
    }
    return out;
  } else {
    return a + b;
  }
}

}  // namespace detail

/// Sum of non-negative values: exact for integer and rational scalars,
/// Neumaier-compensated for floating point.
template <class Scalar>
Scalar birkhoff_sum(std::span<const Scalar> values) {
  if constexpr (std::is_floating_point_v<Scalar>) {
    Scalar sum = 0;
    Scalar compensation = 0;
    for (const Scalar v : values) {
      detail::check_non_negative(v);
      const Scalar t = sum + v;
      if (std::abs(sum) >= std::abs(v)) {
        compensation += (sum - t) + v;
      } else {
        compensation += (v - t) + sum;
      }
      sum = t;
    }
    return sum + compensation;
  } else {
    Scalar sum(0);
    for (const Scalar& v : values) {
      detail::check_non_negative(v);
      sum = detail::checked_add(sum, v);
    }
    return sum;
  }
}

/// Trims the Birkhoff sum of `values` against `threshold`.
///
/// delta = 1 exactly when some value exceeds the threshold; then the
/// maximum (its first occurrence only) is removed.
template <class Scalar>
TrimmedSum<Scalar> trim(std::span<const Scalar> values, double threshold) {
  TrimmedSum<Scalar> out;
  out.horizon = static_cast<std::int64_t>(values.size());
  out.raw_sum = birkhoff_sum(values);
  for (std::size_t n = 0; n < values.size(); ++n) {
    if (out.argmax < 0 || values[n] > out.max_term) {
      out.max_term = values[n];
      out.argmax = static_cast<std::int64_t>(n);
    }
    if (detail::exceeds(values[n], threshold)) ++out.exceedances;
  }
  out.delta = out.exceedances >= 1 ? 1 : 0;
  out.trimmed_sum = out.delta ? Scalar(out.raw_sum - out.max_term) : out.raw_sum;
  return out;
}

/// Sum of the values that do not exceed the threshold: the collapsed form
/// of sum_{m<N} sum_{n<=N} f_n(T^m x) over the family
/// f_n = f * 1{tau(n-1) < f <= tau(n)}.
template <class Scalar>
Scalar phi_aggregate(std::span<const Scalar> values, double threshold) {
  Scalar sum(0);
  for (const Scalar& v : values) {
    detail::check_non_negative(v);
    if (!detail::exceeds(v, threshold)) sum = detail::checked_add(sum, v);
  }
  return sum;
}

/// Phi_N(x) for the system's observable with threshold tau(N).
std::int64_t phi_aggregate(const SystemModel& system, const TailProfile& profile,
                           LazyUniformReal& x, std::int64_t n);

/// #{n < N : values[n] > tau(N)} for every N in the grid.
std::vector<std::int64_t> exceedance_curve(std::span<const std::int64_t> values,
                                           const TailProfile& profile,
                                           std::span<const std::int64_t> grid);

std::vector<std::int64_t> exceedance_curve(const SystemModel& system, const TailProfile& profile,
                                           LazyUniformReal& x, std::span<const std::int64_t> grid);

/// CSV row seed,N,raw,max,argmax,delta,exceedances,trimmed.
void write_trimmed_csv_header(std::ostream& out);
void write_trimmed_csv_row(std::ostream& out, std::uint64_t seed, const TrimmedSum<std::int64_t>& sum);

}  // namespace trimlab
