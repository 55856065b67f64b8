#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "trimlab/io.hpp"
#include "trimlab/mainterm.hpp"
#include "trimlab/mixing.hpp"
#include "trimlab/system_model.hpp"

namespace trimlab {

struct ExperimentConfig {
  SystemModel system = SystemModel::gauss();
  TailProfile profile{};
  std::vector<std::int64_t> grid;
  std::size_t sample_count = 1;
  std::uint64_t base_seed = 1;
  MixingProfile mixing = asserted_profile(1.0, 1);
  /// Worker threads; 0 means one per processor. Never affects results.
  unsigned threads = 0;
  /// Called once per finished sample, possibly from a worker thread
  /// (calls are serialized).
  std::function<void(const std::string&)> log;

  /// Grid strictly increasing with minimum >= 2 and at least one sample.
  void validate() const;
  /// Everything that determines the output (threads excluded).
  nlohmann::json to_json() const;
};

/// One sample at one horizon of a trimmed-sum experiment.
struct SampleRecord {
  std::uint64_t seed = 0;
  std::int64_t n = 0;
  std::int64_t raw = 0;
  std::int64_t max_term = 0;
  int delta = 0;
  std::int64_t exceedances = 0;
  std::int64_t trimmed = 0;
  double main_term = 0.0;
  double error = 0.0;
  double normalized_error = 0.0;

  bool operator==(const SampleRecord&) const = default;
};

struct SampleFailure {
  std::uint64_t seed = 0;
  std::string message;
};

struct TrimExperiment {
  MainTermTable table;
  std::vector<SampleRecord> records;  // sorted by (seed, N)
  std::vector<SampleFailure> failures;
};

/// Per seed: one orbit to the largest horizon, then the trimmed sum at
/// every grid point against tau(N) and the main term N F1(N). The error is
/// normalized by F3^{2/3} (ln F3)^{1/3 + eps}.
TrimExperiment run_trim_experiment(const ExperimentConfig& config);

struct ClassicalRecord {
  std::uint64_t seed = 0;
  std::int64_t n = 0;
  std::int64_t raw = 0;
  double average = 0.0;
  double deviation = 0.0;

  bool operator==(const ClassicalRecord&) const = default;
};

struct ClassicalExperiment {
  double mean = 0.0;
  std::vector<ClassicalRecord> records;
  std::vector<SampleFailure> failures;
};

/// Ergodic averages of a square-integrable observable against its integral.
ClassicalExperiment run_classical_experiment(const ExperimentConfig& config);

enum class Normalization { n_log_n, n_squared, linear };
std::string to_string(Normalization normalization);
Normalization parse_normalization(std::string_view text);
double normalizer(Normalization normalization, std::int64_t n);

struct DispersionRow {
  std::int64_t n = 0;
  double median = 0.0;
  double iqr = 0.0;
  double max_over_median = 0.0;

  double iqr_over_median() const { return iqr / median; }
  bool operator==(const DispersionRow&) const = default;
};

struct DispersionReport {
  Normalization normalization = Normalization::n_log_n;
  std::vector<DispersionRow> rows;
  std::vector<SampleFailure> failures;
};

/// Across-sample spread of trimmed sums divided by F_N. Run on the doubling
/// map with floor(1/{2^n x}) it shows the lack of concentration; on the
/// Gauss map it is the concentrating control.
DispersionReport run_counterexample(const ExperimentConfig& config,
                                    Normalization normalization = Normalization::n_log_n);

// CSV schemas:
//   trim        seed,N,raw,max,delta,exceedances,trimmed,main_term,error,normalized_error
//   classical   seed,N,raw,average,deviation
//   dispersion  N,median,iqr,max_over_median
void write_csv(std::ostream& out, std::span<const SampleRecord> records);
void write_csv(std::ostream& out, std::span<const ClassicalRecord> records);
void write_csv(std::ostream& out, std::span<const DispersionRow> rows);

/// {"config": ..., "records": [...]}, one object per CSV row.
nlohmann::json to_json(std::span<const SampleRecord> records, const nlohmann::json& config = {});
nlohmann::json to_json(std::span<const ClassicalRecord> records, const nlohmann::json& config = {});
nlohmann::json to_json(std::span<const DispersionRow> rows, const nlohmann::json& config = {});

std::vector<SampleRecord> sample_records_from_json(const nlohmann::json& document);
std::vector<ClassicalRecord> classical_records_from_json(const nlohmann::json& document);
std::vector<DispersionRow> dispersion_rows_from_json(const nlohmann::json& document);

void persist(std::span<const SampleRecord> records, const std::filesystem::path& path,
             Format format, const nlohmann::json& config = {});
void persist(std::span<const ClassicalRecord> records, const std::filesystem::path& path,
             Format format, const nlohmann::json& config = {});
void persist(std::span<const DispersionRow> rows, const std::filesystem::path& path,
             Format format, const nlohmann::json& config = {});

}  // namespace trimlab
