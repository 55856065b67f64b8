#pragma once

// Finite-state Markov shifts. Everything here is templated on the matrix
// scalar so the same code runs exactly over mpq_class and approximately
// over double.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "trimlab/error.hpp"
#include "trimlab/rational.hpp"

namespace trimlab {

namespace detail {

template <class Scalar>
bool is_zero(const Scalar& x) {
  if constexpr (std::is_floating_point_v<Scalar>) {
    return std::abs(x) < 1e-300;
  } else {
    return sgn(x) == 0;
  }
}

template <class Scalar>
Scalar magnitude(const Scalar& x) {
  using std::abs;
  return Scalar(abs(x));
}

}  // namespace detail

template <class Scalar>
bool is_stochastic(const Matrix<Scalar>& transition) {
  if (transition.rows() == 0 || transition.rows() != transition.cols()) return false;
  for (Eigen::Index i = 0; i < transition.rows(); ++i) {
    Scalar row_sum(0);
    for (Eigen::Index j = 0; j < transition.cols(); ++j) {
      if (transition(i, j) < Scalar(0)) return false;
      row_sum += transition(i, j);
    }
    if constexpr (std::is_floating_point_v<Scalar>) {
      if (std::abs(row_sum - 1.0) > 1e-12) return false;
    } else {
      if (row_sum != Scalar(1)) return false;
    }
  }
  return true;
}

/// Solves A x = b by Gauss-Jordan elimination with partial pivoting.
template <class Scalar>
Vector<Scalar> solve_linear(Matrix<Scalar> a, Vector<Scalar> b) {
  const Eigen::Index n = a.rows();
  for (Eigen::Index col = 0; col < n; ++col) {
    Eigen::Index pivot = col;
    for (Eigen::Index r = col + 1; r < n; ++r) {
      if (detail::magnitude(a(r, col)) > detail::magnitude(a(pivot, col))) pivot = r;
    }
    if (detail::is_zero(a(pivot, col))) {
      throw Error(Errc::degenerate, "singular linear system");
    }
    if (pivot != col) {
      a.row(pivot).swap(a.row(col));
      std::swap(b(pivot), b(col));
    }
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r == col || detail::is_zero(a(r, col))) continue;
      const Scalar factor = a(r, col) / a(col, col);
      for (Eigen::Index c = col; c < n; ++c) a(r, c) -= factor * a(col, c);
      b(r) -= factor * b(col);
    }
  }
  Vector<Scalar> x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = b(i) / a(i, i);
  return x;
}

/// Unique stationary row vector pi with pi P = pi and sum(pi) = 1.
template <class Scalar>
Vector<Scalar> stationary_distribution(const Matrix<Scalar>& transition) {
  const Eigen::Index n = transition.rows();
  Matrix<Scalar> a = transition.transpose();
  for (Eigen::Index i = 0; i < n; ++i) a(i, i) -= Scalar(1);
  for (Eigen::Index c = 0; c < n; ++c) a(n - 1, c) = Scalar(1);
  Vector<Scalar> b = Vector<Scalar>::Zero(n);
  b(n - 1) = Scalar(1);
  return solve_linear<Scalar>(std::move(a), std::move(b));
}

/// mu of the cylinder [w_0 w_1 ... w_{k-1}] = pi_{w_0} prod P_{w_i w_{i+1}}.
template <class Scalar>
Scalar markov_cylinder_measure(const Vector<Scalar>& stationary, const Matrix<Scalar>& transition,
                               std::span<const std::int64_t> word) {
  if (word.empty()) return Scalar(1);
  Scalar measure = stationary(word.front());
  for (std::size_t k = 1; k < word.size(); ++k) measure *= transition(word[k - 1], word[k]);
  return measure;
}

/// P^0, P^1, ..., P^max_power.
template <class Scalar>
std::vector<Matrix<Scalar>> transition_powers(const Matrix<Scalar>& transition, int max_power) {
  std::vector<Matrix<Scalar>> powers;
  powers.reserve(static_cast<std::size_t>(max_power) + 1);
  powers.push_back(Matrix<Scalar>::Identity(transition.rows(), transition.cols()));
  for (int n = 1; n <= max_power; ++n) {
    Matrix<Scalar> next = powers.back() * transition;
    powers.push_back(std::move(next));
  }
  return powers;
}

}  // namespace trimlab
