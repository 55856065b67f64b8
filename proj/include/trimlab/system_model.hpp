#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "trimlab/rational.hpp"

namespace trimlab {

enum class SystemKind { gauss, doubling, markov };

std::string to_string(SystemKind kind);
SystemKind parse_system_kind(std::string_view text);

/// How the space is cut into cells A_i on which the observable is constant.
enum class PartitionKind {
  gauss_digits,        ///< A_n = {a_1 = n}, n >= 1
  doubling_cylinders,  ///< dyadic cylinders of a fixed level k, index = word read as a k-bit integer
  doubling_inverse,    ///< A_n = {floor(1/x) = n}, n >= 1
  markov_states,       ///< one cell per state
  table,               ///< explicit (possibly truncated) table without dynamics
};

/// Measure of a set: always a double, exact when the system allows it.
struct Measure {
  double value = 0.0;
  std::optional<mpq_class> exact;
};

/// A measure-preserving symbolic system together with the observable f,
/// given by its constant value on every partition cell.
///
/// Countable partitions (Gauss digits, level sets of floor(1/x)) are
/// evaluated in closed form; `max_cell` only bounds explicit enumerations
/// such as mixing matrices. Immutable once built.
class SystemModel {
 public:
  static SystemModel gauss();
  static SystemModel doubling_cylinders(int level, std::vector<std::int64_t> values);
  /// f = 1 on [0, 1/2), 0 on [1/2, 1).
  static SystemModel doubling_indicator();
  /// f = floor(1/x), the observable whose orbit sums are floor(1/{2^n x}).
  static SystemModel doubling_inverse_fraction();
  static SystemModel markov(Matrix<mpq_class> transition, std::vector<std::int64_t> values);
  /// Finite table of cells; `tail_mass` is the measure not covered by the
  /// table, on which f is only known to be >= `tail_min_value`.
  static SystemModel table(std::vector<double> measures, std::vector<std::int64_t> values,
                           double tail_mass, std::int64_t tail_min_value);

  SystemKind kind() const noexcept { return kind_; }
  PartitionKind partition() const noexcept { return partition_; }
  std::string name() const;

  /// Number of cells, or nullopt for countable partitions.
  std::optional<std::int64_t> cell_count() const;
  std::int64_t first_cell() const noexcept;
  bool valid_cell(std::int64_t i) const;

  Measure cell_measure(std::int64_t i) const;
  std::int64_t observable_value(std::int64_t i) const;

  /// Endpoints (a, b) of cell i for doubling partitions (cells are intervals).
  std::pair<mpq_class, mpq_class> cell_interval(std::int64_t i) const;

  int level() const noexcept { return level_; }
  const Matrix<mpq_class>& transition() const noexcept { return transition_; }
  const Vector<mpq_class>& stationary() const noexcept { return stationary_; }

  std::int64_t max_cell() const noexcept { return max_cell_; }
  SystemModel with_max_cell(std::int64_t cap) const;

  double tail_mass() const noexcept { return tail_mass_; }
  std::int64_t tail_min_value() const noexcept { return tail_min_value_; }

  /// Integral of f when it is finite (finite partitions only).
  std::optional<mpq_class> exact_mean() const;

 private:
  SystemModel() = default;

  SystemKind kind_ = SystemKind::gauss;
  PartitionKind partition_ = PartitionKind::gauss_digits;
  int level_ = 0;
  std::vector<std::int64_t> values_;
  std::vector<double> table_measures_;
  Matrix<mpq_class> transition_;
  Vector<mpq_class> stationary_;
  std::int64_t max_cell_ = 1'000'000;
  double tail_mass_ = 0.0;
  std::int64_t tail_min_value_ = 0;
};

}  // namespace trimlab
