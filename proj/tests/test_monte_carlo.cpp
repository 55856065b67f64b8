#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "trimlab/dynamics.hpp"
#include "trimlab/experiments.hpp"
#include "trimlab/mainterm.hpp"
#include "trimlab/mixing.hpp"
#include "trimlab/stats.hpp"
#include "trimlab/trimming.hpp"

using namespace trimlab;

namespace {

ExperimentConfig harness(SystemModel system, std::size_t samples) {
  ExperimentConfig config;
  config.system = std::move(system);
  config.profile = TailProfile(1.0, 0.0, 0.5);
  config.grid = {1000, 10000, 100000};
  config.sample_count = samples;
  config.base_seed = 1;
  return config;
}

template <class Record, class Get>
std::map<std::int64_t, std::vector<double>> by_n(const std::vector<Record>& records, Get get) {
  std::map<std::int64_t, std::vector<double>> out;
  for (const Record& r : records) out[r.n].push_back(get(r));
  return out;
}

double median_slope(const std::map<std::int64_t, std::vector<double>>& columns) {
  std::vector<std::pair<double, double>> pairs;
  for (const auto& [n, v] : columns) pairs.emplace_back(static_cast<double>(n), median(v));
  return fit_exponent(pairs).slope;
}

const TrimExperiment& gauss_200() {
  static const TrimExperiment run = run_trim_experiment(harness(SystemModel::gauss(), 200));
  return run;
}

}  // namespace

TEST_CASE("digit 1 frequency along a million gauss digits") {
  LazyUniformReal x = sample_real(7);
  const OrbitDigits d = gauss_digits(x, 1'000'000);
  const double ones = static_cast<double>(std::count(d.symbols.begin(), d.symbols.end(), 1));
  CHECK(std::abs(ones / 1e6 - std::log(4.0 / 3.0) / std::log(2.0)) <= 0.005);
}

TEST_CASE("the trimmed aggregate tracks N F1") {
  const TailProfile profile(1.0, 0.0, 0.5);
  LazyUniformReal x = sample_real(7);
  const std::int64_t phi = phi_aggregate(SystemModel::gauss(), profile, x, 10000);
  const std::vector<std::int64_t> grid{10000};
  const MainTermTable table = build_main_terms(SystemModel::gauss(), profile, constant_g(1.0), grid);
  const double ratio = static_cast<double>(phi) / (10000.0 * table.F1[0]);
  CHECK(ratio >= 0.9);
  CHECK(ratio <= 1.1);
}

TEST_CASE("two exceedances are rare") {
  ExperimentConfig config = harness(SystemModel::gauss(), 100);
  config.grid = {100000};
  const TrimExperiment run = run_trim_experiment(config);
  REQUIRE(run.failures.empty());
  const auto several = std::count_if(run.records.begin(), run.records.end(),
                                     [](const SampleRecord& r) { return r.exceedances >= 2; });
  CHECK(static_cast<double>(several) / 100.0 <= 0.05);
}

TEST_CASE("normalized gauss errors stay bounded") {
  const TrimExperiment& run = gauss_200();
  REQUIRE(run.failures.empty());
  const auto normalized = by_n(run.records, [](const SampleRecord& r) { return std::abs(r.normalized_error); });
  const double first = median(normalized.at(1000)), last = median(normalized.at(100000));
  CHECK(std::isfinite(last));
  CHECK(last <= 3.0 * first);
}

TEST_CASE("gauss trimmed error exponent") {
  const TrimExperiment& run = gauss_200();
  REQUIRE(run.failures.empty());
  const double slope = median_slope(by_n(run.records, [](const SampleRecord& r) { return std::abs(r.error); }));
  MESSAGE("trimmed error slope " << slope);
  CHECK(slope <= 0.8);
}

TEST_CASE("classical averages of a bounded observable") {
  const ClassicalExperiment run = run_classical_experiment(harness(SystemModel::doubling_indicator(), 100));
  REQUIRE(run.failures.empty());
  const auto deviation = by_n(run.records, [](const ClassicalRecord& r) { return std::abs(r.deviation); });
  CHECK(median(deviation.at(100000)) <= 0.01);
  CHECK(median_slope(deviation) <= -0.25);
}

TEST_CASE("markov g has no trend") {
  Matrix<mpq_class> p(3, 3);
  const std::vector<std::vector<mpq_class>> rows{
      {mpq_class(1, 2), mpq_class(1, 4), mpq_class(1, 4)},
      {mpq_class(1, 3), mpq_class(1, 3), mpq_class(1, 3)},
      {mpq_class(1, 5), mpq_class(2, 5), mpq_class(2, 5)}};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) p(i, j) = rows[i][j];
  const SystemModel chain = SystemModel::markov(p, {1, 2, 3});
  const MixingProfile g = estimate_g(chain, 400, 3);
  std::vector<std::pair<double, double>> pairs;
  for (std::int64_t n = 25; n <= 400; n *= 2) pairs.emplace_back(static_cast<double>(n), g.at(n));
  CHECK(std::abs(fit_exponent(pairs).slope) <= 0.05);
  CHECK(*std::max_element(g.g.begin(), g.g.end()) < 10.0);
}

TEST_CASE("gauss lagged correlations do not move with the cell cap") {
  EmpiricalOptions options;
  options.samples = 32;
  options.orbit_length = 20'000;
  options.base_seed = 5;
  const UniformityReport report = uniformity_report(SystemModel::gauss(), 50, 20, &options);
  const double se = std::hypot(report.std_error, report.std_error_half_cap);
  MESSAGE("lagged max " << report.lagged_max << " vs " << report.lagged_max_half_cap << " se " << se);
  CHECK(std::abs(report.lagged_max - report.lagged_max_half_cap) <= 3.0 * se);
  CHECK_FALSE(report.lagged_grows);
}

TEST_CASE("dispersion of trimmed sums: gauss control against the doubling counterexample") {
  const ExperimentConfig gauss = harness(SystemModel::gauss(), 100);
  const ExperimentConfig doubling = harness(SystemModel::doubling_inverse_fraction(), 100);
  const DispersionReport control = run_counterexample(gauss);
  const DispersionReport counter = run_counterexample(doubling);
  REQUIRE(control.rows.size() == 3);
  REQUIRE(counter.rows.size() == 3);
  CHECK(control.rows.back().iqr_over_median() < control.rows.front().iqr_over_median());
  CHECK_FALSE(counter.rows.back().iqr_over_median() < 0.5 * counter.rows.front().iqr_over_median());
  const DispersionReport over = run_counterexample(doubling, Normalization::n_squared);
  for (std::size_t k = 1; k < over.rows.size(); ++k) CHECK(over.rows[k].median < over.rows[k - 1].median);
  CHECK(over.rows.back().median < 1e-3);
}
