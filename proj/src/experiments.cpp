#include "trimlab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <optional>
#include <ostream>
#include <thread>

#include "trimlab/dynamics.hpp"
#include "trimlab/error.hpp"
#include "trimlab/lazy_real.hpp"
#include "trimlab/stats.hpp"
#include "trimlab/trimming.hpp"

namespace trimlab {

void ExperimentConfig::validate() const {
  if (grid.empty()) throw Error(Errc::invalid_argument, "grid is empty");
  if (grid.front() < 2) throw Error(Errc::invalid_argument, "grid values must be >= 2");
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (grid[k] <= grid[k - 1]) throw Error(Errc::invalid_argument, "grid must be strictly increasing");
  }
  if (sample_count < 1) throw Error(Errc::invalid_argument, "sample count must be >= 1");
  if (system.partition() == PartitionKind::table) {
    throw Error(Errc::invalid_argument, "a table system has no orbits to sample");
  }
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json sys = {{"name", system.name()}, {"kind", trimlab::to_string(system.kind())}};
  if (const auto count = system.cell_count()) {
    nlohmann::json values = nlohmann::json::array();
    for (std::int64_t i = system.first_cell(); i < *count; ++i) values.push_back(system.observable_value(i));
    sys["cell_values"] = std::move(values);
  }
  if (system.partition() == PartitionKind::markov_states) {
    nlohmann::json rows = nlohmann::json::array();
    const auto& p = system.transition();
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index j = 0; j < p.cols(); ++j) row.push_back(trimlab::to_string(p(i, j)));
      rows.push_back(std::move(row));
    }
    sys["transition"] = std::move(rows);
  }
  return {{"system", std::move(sys)},
          {"profile", {{"p", profile.p()}, {"q", profile.q()}, {"epsilon", profile.epsilon()}}},
          {"grid", grid},
          {"samples", sample_count},
          {"base_seed", base_seed},
          {"mixing",
           {{"mode", trimlab::to_string(mixing.mode)},
            {"cell_cap", mixing.cell_cap},
            {"asserted_constant", mixing.asserted_constant},
            {"n_max", mixing.n_max()}}}};
}

namespace {

template <class Result>
struct SampleOutcome {
  std::uint64_t seed = 0;
  std::optional<Result> result;
  std::string failure;
};

// Runs `work(seed)` for every sample on a pool of threads. Each sample owns
// its slot, so the outcome does not depend on scheduling.
template <class Result, class Work>
std::vector<SampleOutcome<Result>> run_samples(const ExperimentConfig& config, Work work) {
  std::vector<SampleOutcome<Result>> outcomes(config.sample_count);
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t index = next++; index < outcomes.size(); index = next++) {
      auto& slot = outcomes[index];
      slot.seed = sample_seed(config.base_seed, index);
      try {
        slot.result.emplace(work(slot.seed));
      } catch (const std::exception& e) {
        slot.failure = e.what();
      }
      if (config.log) {
        const std::lock_guard lock(log_mutex);
        config.log("sample " + std::to_string(index) + " seed " + std::to_string(slot.seed) +
                   (slot.result ? " ok" : " failed: " + slot.failure));
      }
    }
  };
  unsigned threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, outcomes.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  std::stable_sort(outcomes.begin(), outcomes.end(),
                   [](const auto& a, const auto& b) { return a.seed < b.seed; });
  return outcomes;
}

// Trimmed sums of one orbit at every grid point.
std::vector<TrimmedSum<std::int64_t>> trimmed_along_grid(const ExperimentConfig& config,
                                                         const std::vector<double>& thresholds,
                                                         std::uint64_t seed) {
  LazyUniformReal x(seed);
  const OrbitDigits path = orbit(config.system, x, static_cast<std::size_t>(config.grid.back()));
  const std::span<const std::int64_t> values(path.values);
  std::vector<TrimmedSum<std::int64_t>> sums;
  sums.reserve(config.grid.size());
  for (std::size_t k = 0; k < config.grid.size(); ++k) {
    sums.push_back(trim(values.first(static_cast<std::size_t>(config.grid[k])), thresholds[k]));
  }
  return sums;
}

std::vector<double> thresholds_for(const ExperimentConfig& config) {
  std::vector<double> out;
  for (const std::int64_t n : config.grid) out.push_back(tau(config.profile, n));
  return out;
}

}  // namespace

TrimExperiment run_trim_experiment(const ExperimentConfig& config) {
  config.validate();
  TrimExperiment experiment{build_main_terms(config.system, config.profile, config.mixing.as_function(), config.grid),
                            {},
                            {}};
  const MainTermTable& table = experiment.table;
  const double exponent = 1.0 / 3.0 + config.profile.epsilon();
  auto outcomes = run_samples<std::vector<SampleRecord>>(config, [&](std::uint64_t seed) {
    const auto sums = trimmed_along_grid(config, table.tau, seed);
    std::vector<SampleRecord> records;
    for (std::size_t k = 0; k < sums.size(); ++k) {
      const auto& s = sums[k];
      SampleRecord r;
      r.seed = seed;
      r.n = s.horizon;
      r.raw = s.raw_sum;
      r.max_term = s.max_term;
      r.delta = s.delta;
      r.exceedances = s.exceedances;
      r.trimmed = s.trimmed_sum;
      r.main_term = static_cast<double>(s.horizon) * table.F1[k];
      r.error = static_cast<double>(s.trimmed_sum) - r.main_term;
      const double f3 = table.F3[k];
      r.normalized_error = r.error / (std::pow(f3, 2.0 / 3.0) * std::pow(std::log(f3), exponent));
      records.push_back(r);
    }
    return records;
  });
  for (auto& outcome : outcomes) {
    if (outcome.result) {
      experiment.records.insert(experiment.records.end(), outcome.result->begin(), outcome.result->end());
    } else {
      experiment.failures.push_back({outcome.seed, outcome.failure});
    }
  }
  return experiment;
}

ClassicalExperiment run_classical_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto mean = config.system.exact_mean();
  if (!mean) throw Error(Errc::invalid_argument, "classical averages need a finite partition with a known integral");
  ClassicalExperiment experiment;
  experiment.mean = mean->get_d();
  auto outcomes = run_samples<std::vector<ClassicalRecord>>(config, [&](std::uint64_t seed) {
    LazyUniformReal x(seed);
    const OrbitDigits path = orbit(config.system, x, static_cast<std::size_t>(config.grid.back()));
    std::vector<ClassicalRecord> records;
    std::int64_t raw = 0;
    std::size_t reached = 0;
    for (const std::int64_t n : config.grid) {
      for (; reached < static_cast<std::size_t>(n); ++reached) {
        raw = detail::checked_add(raw, path.values[reached]);
      }
      const double average = static_cast<double>(raw) / static_cast<double>(n);
      records.push_back({seed, n, raw, average, average - experiment.mean});
    }
    return records;
  });
  for (auto& outcome : outcomes) {
    if (outcome.result) {
      experiment.records.insert(experiment.records.end(), outcome.result->begin(), outcome.result->end());
    } else {
      experiment.failures.push_back({outcome.seed, outcome.failure});
    }
  }
  return experiment;
}

std::string to_string(Normalization normalization) {
  switch (normalization) {
    case Normalization::n_log_n:
      return "n-log-n";
    case Normalization::n_squared:
      return "n-squared";
    case Normalization::linear:
      return "linear";
  }
  return "n-log-n";
}

Normalization parse_normalization(std::string_view text) {
  if (text == "n-log-n") return Normalization::n_log_n;
  if (text == "n-squared") return Normalization::n_squared;
  if (text == "linear") return Normalization::linear;
  throw Error(Errc::invalid_argument, "unknown normalization '" + std::string(text) + "'");
}

double normalizer(Normalization normalization, std::int64_t n) {
  const double nn = static_cast<double>(n);
  switch (normalization) {
    case Normalization::n_log_n:
      return nn * std::log(nn);
    case Normalization::n_squared:
      return nn * nn;
    case Normalization::linear:
      return nn;
  }
  return nn;
}

DispersionReport run_counterexample(const ExperimentConfig& config, Normalization normalization) {
  config.validate();
  const std::vector<double> thresholds = thresholds_for(config);
  auto outcomes = run_samples<std::vector<double>>(config, [&](std::uint64_t seed) {
    const auto sums = trimmed_along_grid(config, thresholds, seed);
    std::vector<double> normalized;
    for (const auto& s : sums) normalized.push_back(static_cast<double>(s.trimmed_sum) / normalizer(normalization, s.horizon));
    return normalized;
  });
  DispersionReport report;
  report.normalization = normalization;
  std::vector<std::vector<double>> columns(config.grid.size());
  for (auto& outcome : outcomes) {
    if (!outcome.result) {
      report.failures.push_back({outcome.seed, outcome.failure});
      continue;
    }
    for (std::size_t k = 0; k < columns.size(); ++k) columns[k].push_back((*outcome.result)[k]);
  }
  if (columns.front().empty()) throw Error(Errc::degenerate, "every sample failed");
  for (std::size_t k = 0; k < columns.size(); ++k) {
    const double med = median(columns[k]);
    const double top = *std::max_element(columns[k].begin(), columns[k].end());
    report.rows.push_back({config.grid[k], med, interquartile_range(columns[k]), top / med});
  }
  return report;
}

void write_csv(std::ostream& out, std::span<const SampleRecord> records) {
  out << "seed,N,raw,max,delta,exceedances,trimmed,main_term,error,normalized_error\n";
  for (const auto& r : records) {
    out << r.seed << ',' << r.n << ',' << r.raw << ',' << r.max_term << ',' << r.delta << ',' << r.exceedances << ','
        << r.trimmed << ',' << format_double(r.main_term) << ',' << format_double(r.error) << ','
        << format_double(r.normalized_error) << '\n';
  }
}

void write_csv(std::ostream& out, std::span<const ClassicalRecord> records) {
  out << "seed,N,raw,average,deviation\n";
  for (const auto& r : records) {
    out << r.seed << ',' << r.n << ',' << r.raw << ',' << format_double(r.average) << ','
        << format_double(r.deviation) << '\n';
  }
}

void write_csv(std::ostream& out, std::span<const DispersionRow> rows) {
  out << "N,median,iqr,max_over_median\n";
  for (const auto& r : rows) {
    out << r.n << ',' << format_double(r.median) << ',' << format_double(r.iqr) << ','
        << format_double(r.max_over_median) << '\n';
  }
}

namespace {

nlohmann::json wrap(nlohmann::json records, const nlohmann::json& config) {
  return {{"config", config}, {"records", std::move(records)}};
}

const nlohmann::json& records_of(const nlohmann::json& document) {
  if (!document.is_object() || !document.contains("records") || !document["records"].is_array()) {
    throw Error(Errc::invalid_argument, "document has no records array");
  }
  return document["records"];
}

}  // namespace

nlohmann::json to_json(std::span<const SampleRecord> records, const nlohmann::json& config) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : records) {
    rows.push_back({{"seed", r.seed},
                    {"N", r.n},
                    {"raw", r.raw},
                    {"max", r.max_term},
                    {"delta", r.delta},
                    {"exceedances", r.exceedances},
                    {"trimmed", r.trimmed},
                    {"main_term", r.main_term},
                    {"error", r.error},
                    {"normalized_error", r.normalized_error}});
  }
  return wrap(std::move(rows), config);
}

nlohmann::json to_json(std::span<const ClassicalRecord> records, const nlohmann::json& config) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : records) {
    rows.push_back({{"seed", r.seed}, {"N", r.n}, {"raw", r.raw}, {"average", r.average}, {"deviation", r.deviation}});
  }
  return wrap(std::move(rows), config);
}

nlohmann::json to_json(std::span<const DispersionRow> rows, const nlohmann::json& config) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back({{"N", r.n}, {"median", r.median}, {"iqr", r.iqr}, {"max_over_median", r.max_over_median}});
  }
  return wrap(std::move(out), config);
}

std::vector<SampleRecord> sample_records_from_json(const nlohmann::json& document) {
  std::vector<SampleRecord> out;
  for (const auto& row : records_of(document)) {
    SampleRecord r;
    r.seed = row.at("seed").get<std::uint64_t>();
    r.n = row.at("N").get<std::int64_t>();
    r.raw = row.at("raw").get<std::int64_t>();
    r.max_term = row.at("max").get<std::int64_t>();
    r.delta = row.at("delta").get<int>();
    r.exceedances = row.at("exceedances").get<std::int64_t>();
    r.trimmed = row.at("trimmed").get<std::int64_t>();
    r.main_term = row.at("main_term").get<double>();
    r.error = row.at("error").get<double>();
    r.normalized_error = row.at("normalized_error").get<double>();
    out.push_back(r);
  }
  return out;
}

std::vector<ClassicalRecord> classical_records_from_json(const nlohmann::json& document) {
  std::vector<ClassicalRecord> out;
  for (const auto& row : records_of(document)) {
    out.push_back({row.at("seed").get<std::uint64_t>(), row.at("N").get<std::int64_t>(),
                   row.at("raw").get<std::int64_t>(), row.at("average").get<double>(),
                   row.at("deviation").get<double>()});
  }
  return out;
}

std::vector<DispersionRow> dispersion_rows_from_json(const nlohmann::json& document) {
  std::vector<DispersionRow> out;
  for (const auto& row : records_of(document)) {
    out.push_back({row.at("N").get<std::int64_t>(), row.at("median").get<double>(), row.at("iqr").get<double>(),
                   row.at("max_over_median").get<double>()});
  }
  return out;
}

namespace {

template <class Row>
void persist_rows(std::span<const Row> rows, const std::filesystem::path& path, Format format,
                  const nlohmann::json& config) {
  write_file(path, [&](std::ostream& out) {
    if (format == Format::json) {
      out << to_json(rows, config).dump(2) << '\n';
      return;
    }
    if (!config.is_null()) out << "# config " << config.dump() << '\n';
    write_csv(out, rows);
  });
}

}  // namespace

void persist(std::span<const SampleRecord> records, const std::filesystem::path& path, Format format,
             const nlohmann::json& config) {
  persist_rows(records, path, format, config);
}

void persist(std::span<const ClassicalRecord> records, const std::filesystem::path& path, Format format,
             const nlohmann::json& config) {
  persist_rows(records, path, format, config);
}

void persist(std::span<const DispersionRow> rows, const std::filesystem::path& path, Format format,
             const nlohmann::json& config) {
  persist_rows(rows, path, format, config);
}

}  // namespace trimlab
