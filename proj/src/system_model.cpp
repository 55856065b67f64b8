#include "trimlab/system_model.hpp"

#include <cmath>
#include <string>

#include "trimlab/error.hpp"
#include "trimlab/mainterm.hpp"
#include "trimlab/markov.hpp"

namespace trimlab {

std::string to_string(SystemKind kind) {
  switch (kind) {
    case SystemKind::gauss: return "gauss";
    case SystemKind::doubling: return "doubling";
    case SystemKind::markov: return "markov";
  }
  return "unknown";
}

SystemKind parse_system_kind(std::string_view text) {
  if (text == "gauss") return SystemKind::gauss;
  if (text == "doubling") return SystemKind::doubling;
  if (text == "markov") return SystemKind::markov;
  throw Error(Errc::invalid_argument, "unknown system '" + std::string(text) + "'");
}

SystemModel SystemModel::gauss() {
  SystemModel s;
  s.kind_ = SystemKind::gauss;
  s.partition_ = PartitionKind::gauss_digits;
  return s;
}

SystemModel SystemModel::doubling_cylinders(int level, std::vector<std::int64_t> values) {
  if (level < 0 || level > 20) throw Error(Errc::invalid_argument, "cylinder level must be in [0, 20]");
  if (values.size() != (std::size_t{1} << level)) {
    throw Error(Errc::invalid_argument, "need one observable value per level-k cylinder");
  }
  for (const auto v : values) {
    if (v < 0) throw Error(Errc::negative_value, "observable values must be >= 0");
  }
  SystemModel s;
  s.kind_ = SystemKind::doubling;
  s.partition_ = PartitionKind::doubling_cylinders;
  s.level_ = level;
  s.values_ = std::move(values);
  return s;
}

SystemModel SystemModel::doubling_indicator() { return doubling_cylinders(1, {1, 0}); }

SystemModel SystemModel::doubling_inverse_fraction() {
  SystemModel s;
  s.kind_ = SystemKind::doubling;
  s.partition_ = PartitionKind::doubling_inverse;
  return s;
}

SystemModel SystemModel::markov(Matrix<mpq_class> transition, std::vector<std::int64_t> values) {
  if (!is_stochastic(transition)) throw Error(Errc::invalid_argument, "transition matrix is not stochastic");
  if (values.size() != static_cast<std::size_t>(transition.rows())) {
    throw Error(Errc::invalid_argument, "need one observable value per state");
  }
  for (const auto v : values) {
    if (v < 0) throw Error(Errc::negative_value, "observable values must be >= 0");
  }
  SystemModel s;
  s.kind_ = SystemKind::markov;
  s.partition_ = PartitionKind::markov_states;
  s.stationary_ = stationary_distribution<mpq_class>(transition);
  for (Eigen::Index i = 0; i < s.stationary_.size(); ++i) {
    if (sgn(s.stationary_(i)) <= 0) {
      throw Error(Errc::invalid_argument, "chain must be irreducible (every stationary mass > 0)");
    }
  }
  s.transition_ = std::move(transition);
  s.values_ = std::move(values);
  return s;
}

SystemModel SystemModel::table(std::vector<double> measures, std::vector<std::int64_t> values,
                               double tail_mass, std::int64_t tail_min_value) {
  if (measures.size() != values.size() || measures.empty()) {
    throw Error(Errc::invalid_argument, "table needs matching, non-empty measure and value lists");
  }
  double total = tail_mass;
  for (const double m : measures) {
    if (!(m > 0)) throw Error(Errc::invalid_argument, "cell measures must be positive");
    total += m;
  }
  for (const auto v : values) {
    if (v < 0) throw Error(Errc::negative_value, "observable values must be >= 0");
  }
  if (tail_mass < 0 || std::abs(total - 1.0) > 1e-12) {
    throw Error(Errc::invalid_argument, "cell measures plus tail mass must sum to 1");
  }
  SystemModel s;
  s.kind_ = SystemKind::gauss;
  s.partition_ = PartitionKind::table;
  s.table_measures_ = std::move(measures);
  s.values_ = std::move(values);
  s.tail_mass_ = tail_mass;
  s.tail_min_value_ = tail_min_value;
  return s;
}

std::string SystemModel::name() const {
  switch (partition_) {
    case PartitionKind::gauss_digits: return "gauss";
    case PartitionKind::doubling_cylinders: return "doubling-level" + std::to_string(level_);
    case PartitionKind::doubling_inverse: return "doubling-inverse-fraction";
    case PartitionKind::markov_states: return "markov" + std::to_string(transition_.rows());
    case PartitionKind::table: return "table";
  }
  return "unknown";
}

std::optional<std::int64_t> SystemModel::cell_count() const {
  switch (partition_) {
    case PartitionKind::gauss_digits:
    case PartitionKind::doubling_inverse:
      return std::nullopt;
    case PartitionKind::doubling_cylinders:
      return std::int64_t{1} << level_;
    case PartitionKind::markov_states:
      return transition_.rows();
    case PartitionKind::table:
      return static_cast<std::int64_t>(values_.size());
  }
  return std::nullopt;
}

std::int64_t SystemModel::first_cell() const noexcept {
  return (partition_ == PartitionKind::gauss_digits || partition_ == PartitionKind::doubling_inverse) ? 1 : 0;
}

bool SystemModel::valid_cell(std::int64_t i) const {
  if (i < first_cell()) return false;
  const auto count = cell_count();
  return !count || i < *count;
}

Measure SystemModel::cell_measure(std::int64_t i) const {
  if (!valid_cell(i)) throw Error(Errc::invalid_cell, "cell " + std::to_string(i) + " of " + name());
  switch (partition_) {
    case PartitionKind::gauss_digits:
      return {gauss_digit_probability(i), std::nullopt};
    case PartitionKind::doubling_cylinders: {
      mpz_class den;
      mpz_setbit(den.get_mpz_t(), static_cast<unsigned long>(level_));
      mpq_class m(mpz_class(1), den);
      return {m.get_d(), m};
    }
    case PartitionKind::doubling_inverse: {
      mpq_class m(mpz_class(1), mpz_class(mpz_class(i) * (i + 1)));
      m.canonicalize();
      return {m.get_d(), m};
    }
    case PartitionKind::markov_states:
      return {stationary_(i).get_d(), stationary_(i)};
    case PartitionKind::table:
      return {table_measures_[static_cast<std::size_t>(i)], std::nullopt};
  }
  return {};
}

std::int64_t SystemModel::observable_value(std::int64_t i) const {
  if (!valid_cell(i)) throw Error(Errc::invalid_cell, "cell " + std::to_string(i) + " of " + name());
  switch (partition_) {
    case PartitionKind::gauss_digits:
    case PartitionKind::doubling_inverse:
      return i;
    default:
      return values_[static_cast<std::size_t>(i)];
  }
}

std::pair<mpq_class, mpq_class> SystemModel::cell_interval(std::int64_t i) const {
  if (!valid_cell(i)) throw Error(Errc::invalid_cell, "cell " + std::to_string(i) + " of " + name());
  if (partition_ == PartitionKind::doubling_cylinders) {
    mpz_class den;
    mpz_setbit(den.get_mpz_t(), static_cast<unsigned long>(level_));
    mpq_class a(mpz_class(i), den), b(mpz_class(i + 1), den);
    a.canonicalize();
    b.canonicalize();
    return {a, b};
  }
  if (partition_ == PartitionKind::doubling_inverse) {
    mpq_class a(mpz_class(1), mpz_class(i + 1)), b(mpz_class(1), mpz_class(i));
    return {a, b};
  }
  throw Error(Errc::invalid_argument, "cells of " + name() + " are not dyadic-map intervals");
}

SystemModel SystemModel::with_max_cell(std::int64_t cap) const {
  if (cap < 1) throw Error(Errc::invalid_argument, "max cell must be >= 1");
  SystemModel s = *this;
  s.max_cell_ = cap;
  return s;
}

std::optional<mpq_class> SystemModel::exact_mean() const {
  const auto count = cell_count();
  if (!count || partition_ == PartitionKind::table) return std::nullopt;
  mpq_class mean = 0;
  for (std::int64_t i = 0; i < *count; ++i) {
    mean += *cell_measure(i).exact * observable_value(i);
  }
  return mean;
}

}  // namespace trimlab
