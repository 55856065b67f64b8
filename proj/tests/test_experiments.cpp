#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "trimlab/error.hpp"
#include "trimlab/experiments.hpp"

using namespace trimlab;

namespace {

ExperimentConfig small_gauss(std::size_t samples = 6) {
  ExperimentConfig config;
  config.system = SystemModel::gauss();
  config.grid = {10, 100, 1000};
  config.sample_count = samples;
  config.base_seed = 3;
  config.threads = 1;
  return config;
}

std::string csv_of(const std::vector<SampleRecord>& records) {
  std::ostringstream out;
  write_csv(out, records);
  return out.str();
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

}  // namespace

TEST_CASE("configs are validated") {
  ExperimentConfig config = small_gauss();
  CHECK_NOTHROW(config.validate());
  config.grid = {10, 10};
  CHECK_THROWS_AS(config.validate(), Error);
  config.grid = {1, 10};
  CHECK_THROWS_AS(config.validate(), Error);
  config.grid = {};
  CHECK_THROWS_AS(config.validate(), Error);
  config = small_gauss();
  config.sample_count = 0;
  CHECK_THROWS_AS(config.validate(), Error);
  config = small_gauss();
  config.threads = 8;
  CHECK_FALSE(config.to_json().contains("threads"));
  CHECK(config.to_json()["grid"] == nlohmann::json::array({10, 100, 1000}));
}

TEST_CASE("bounded observables are never trimmed") {
  ExperimentConfig config = small_gauss(4);
  config.system = SystemModel::doubling_indicator();
  const TrimExperiment run = run_trim_experiment(config);
  REQUIRE(run.records.size() == 12);
  for (const SampleRecord& r : run.records) {
    CHECK(r.delta == 0);
    CHECK(r.trimmed == r.raw);
    CHECK(r.main_term == static_cast<double>(r.n) / 2);
    CHECK(r.error == static_cast<double>(r.raw) - static_cast<double>(r.n) / 2);
  }
}

TEST_CASE("records satisfy the bookkeeping identity and grow along the grid") {
  const TrimExperiment run = run_trim_experiment(small_gauss());
  REQUIRE(run.failures.empty());
  REQUIRE(run.records.size() == 18);
  for (std::size_t k = 0; k < run.records.size(); ++k) {
    const SampleRecord& r = run.records[k];
    const double rebuilt = r.error + static_cast<double>(r.delta * r.max_term) + r.main_term;
    CHECK(std::abs(rebuilt - static_cast<double>(r.raw)) <= 1e-12 * static_cast<double>(r.raw));
    CHECK(r.trimmed == r.raw - r.delta * r.max_term);
    const std::size_t at = run.table.index_of(r.n);
    CHECK(r.main_term == static_cast<double>(r.n) * run.table.F1[at]);
    if (k % 3 != 0) {
      CHECK(r.seed == run.records[k - 1].seed);
      CHECK(r.raw >= run.records[k - 1].raw);
    }
  }
  for (std::size_t k = 3; k < run.records.size(); k += 3) CHECK(run.records[k - 3].seed < run.records[k].seed);
}

TEST_CASE("runs are deterministic and independent of the thread count") {
  ExperimentConfig one = small_gauss(1);
  CHECK(csv_of(run_trim_experiment(one).records) == csv_of(run_trim_experiment(one).records));
  ExperimentConfig serial = small_gauss(9);
  ExperimentConfig parallel = serial;
  parallel.threads = 4;
  CHECK(csv_of(run_trim_experiment(serial).records) == csv_of(run_trim_experiment(parallel).records));
}

TEST_CASE("failing samples are reported without stopping the run") {
  ExperimentConfig config = small_gauss(3);
  const std::int64_t big = std::numeric_limits<std::int64_t>::max() / 2;
  config.system = SystemModel::doubling_cylinders(1, {big, big});
  config.grid = {2, 5};
  std::vector<std::string> lines;
  config.log = [&](const std::string& line) { lines.push_back(line); };
  const TrimExperiment run = run_trim_experiment(config);
  CHECK(run.records.empty());
  CHECK(run.failures.size() == 3);
  CHECK(run.failures[0].message.find("digit-overflow") != std::string::npos);
  CHECK(lines.size() == 3);
}

TEST_CASE("classical averages") {
  ExperimentConfig config = small_gauss(3);
  config.system = SystemModel::doubling_cylinders(1, {3, 3});
  const ClassicalExperiment constant = run_classical_experiment(config);
  CHECK(constant.mean == 3.0);
  for (const ClassicalRecord& r : constant.records) {
    CHECK(r.average == 3.0);
    CHECK(r.deviation == 0.0);
  }
  config.system = SystemModel::doubling_indicator();
  const ClassicalExperiment indicator = run_classical_experiment(config);
  CHECK(indicator.mean == 0.5);
  for (const ClassicalRecord& r : indicator.records) {
    CHECK(r.average == static_cast<double>(r.raw) / static_cast<double>(r.n));
    CHECK(r.deviation == r.average - 0.5);
  }
  config.system = SystemModel::gauss();
  CHECK_THROWS_AS(run_classical_experiment(config), Error);
}

TEST_CASE("dispersion reports") {
  ExperimentConfig config = small_gauss(20);
  config.system = SystemModel::doubling_inverse_fraction();
  config.grid = {100, 1000, 10000};
  const DispersionReport squared = run_counterexample(config, Normalization::n_squared);
  REQUIRE(squared.rows.size() == 3);
  CHECK(squared.rows[1].median < squared.rows[0].median);
  CHECK(squared.rows[2].median < squared.rows[1].median);
  CHECK(squared.rows[2].median < 1e-3);
  const DispersionReport standard = run_counterexample(config);
  for (const DispersionRow& row : standard.rows) {
    CHECK(row.median > 0);
    CHECK(row.iqr >= 0);
    CHECK(row.max_over_median >= 1);
  }
  CHECK(normalizer(Normalization::n_log_n, 100) == doctest::Approx(100 * std::log(100.0)));
  CHECK(parse_normalization("linear") == Normalization::linear);
  CHECK_THROWS_AS(parse_normalization("cubic"), Error);
}

TEST_CASE("persisted outputs") {
  const auto dir = std::filesystem::temp_directory_path() / "trimlab-persist-test";
  std::filesystem::create_directories(dir);
  const std::vector<SampleRecord> none;
  persist(none, dir / "empty.csv", Format::csv);
  CHECK(slurp(dir / "empty.csv") == "seed,N,raw,max,delta,exceedances,trimmed,main_term,error,normalized_error\n");

  const TrimExperiment run = run_trim_experiment(small_gauss(2));
  const std::vector<SampleRecord> one(run.records.begin(), run.records.begin() + 1);
  persist(one, dir / "one.csv", Format::csv);
  const std::string text = slurp(dir / "one.csv");
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
  CHECK(text.find(std::to_string(one[0].seed) + ",10,") != std::string::npos);

  persist(run.records, dir / "all.json", Format::json, small_gauss(2).to_json());
  const auto document = nlohmann::json::parse(slurp(dir / "all.json"));
  CHECK(sample_records_from_json(document) == run.records);
  CHECK(document["config"]["samples"] == 2);

  persist(run.records, dir / "again.json", Format::json, small_gauss(2).to_json());
  CHECK(slurp(dir / "all.json") == slurp(dir / "again.json"));

  const std::vector<ClassicalRecord> classical{{1, 10, 4, 0.4, -0.1}};
  persist(classical, dir / "classical.json", Format::json);
  CHECK(classical_records_from_json(nlohmann::json::parse(slurp(dir / "classical.json"))) == classical);
  const std::vector<DispersionRow> rows{{100, 1.5, 0.25, 3.0}};
  persist(rows, dir / "rows.json", Format::json);
  CHECK(dispersion_rows_from_json(nlohmann::json::parse(slurp(dir / "rows.json"))) == rows);
  persist(rows, dir / "rows.csv", Format::csv);
  CHECK(slurp(dir / "rows.csv") == "N,median,iqr,max_over_median\n100,1.5,0.25,3\n");

  try {
    persist(rows, "/nonexistent-dir/rows.csv", Format::csv);
    FAIL("expected an I/O error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::io_error);
    CHECK(std::string(e.what()).find("/nonexistent-dir/rows.csv") != std::string::npos);
  }
  std::filesystem::remove_all(dir);
}
