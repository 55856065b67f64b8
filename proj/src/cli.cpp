#include "trimlab/cli.hpp"

#include <charconv>
#include <cmath>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "trimlab/dynamics.hpp"
#include "trimlab/error.hpp"
#include "trimlab/experiments.hpp"
#include "trimlab/io.hpp"
#include "trimlab/mainterm.hpp"
#include "trimlab/mixing.hpp"
#include "trimlab/rational.hpp"
#include "trimlab/system_model.hpp"
#include "trimlab/trimming.hpp"

namespace trimlab::cli {
namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(std::string_view text, char separator) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = text.find(separator, start);
    std::string part(text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
    const auto first = part.find_first_not_of(" \t");
    const auto last = part.find_last_not_of(" \t");
    parts.push_back(first == std::string::npos ? std::string() : part.substr(first, last - first + 1));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return parts;
}

// Integers, or decimals with an integral value such as 1e5.
std::int64_t parse_integer(std::string_view text, std::string_view flag) {
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec == std::errc() && ptr == text.data() + text.size()) return value;
  double decimal = 0;
  const auto [dptr, dec] = std::from_chars(text.data(), text.data() + text.size(), decimal);
  if (dec == std::errc() && dptr == text.data() + text.size() && std::floor(decimal) == decimal &&
      std::abs(decimal) <= 9007199254740992.0) {
    return static_cast<std::int64_t>(decimal);
  }
  throw UsageError(std::string(flag) + ": '" + std::string(text) + "' is not an integer");
}

std::vector<std::int64_t> parse_integer_list(std::string_view text, std::string_view flag) {
  std::vector<std::int64_t> values;
  if (text.empty()) return values;
  for (const auto& part : split(text, ',')) values.push_back(parse_integer(part, flag));
  return values;
}

// Comma list, or a:b for every integer from a to b.
std::vector<std::int64_t> parse_grid(std::string_view text) {
  if (text.find(':') != std::string_view::npos) {
    const auto ends = split(text, ':');
    if (ends.size() != 2) throw UsageError("--ngrid: expected a:b");
    const std::int64_t lo = parse_integer(ends[0], "--ngrid");
    const std::int64_t hi = parse_integer(ends[1], "--ngrid");
    if (hi < lo || hi - lo > 100'000'000) throw UsageError("--ngrid: bad range");
    std::vector<std::int64_t> grid;
    for (std::int64_t n = lo; n <= hi; ++n) grid.push_back(n);
    return grid;
  }
  return parse_integer_list(text, "--ngrid");
}

Matrix<mpq_class> parse_matrix(std::string_view text) {
  const auto rows = split(text, ';');
  Matrix<mpq_class> m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto entries = split(rows[i], ',');
    if (entries.size() != rows.size()) throw UsageError("--matrix: transition matrix must be square");
    for (std::size_t j = 0; j < entries.size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = parse_rational(entries[j]);
    }
  }
  return m;
}

// Turns argument errors raised while interpreting flags into usage errors.
template <class Fn>
auto interpret(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() == Errc::invalid_argument || e.code() == Errc::invalid_symbol) throw UsageError(e.what());
    throw;
  }
}

struct SystemOptions {
  std::string system = "gauss";
  std::string observable;
  int level = 1;
  std::string cell_values;
  std::string matrix;

  void add(CLI::App* app, const std::string& default_system = "gauss") {
    system = default_system;
    app->add_option("--system", system, "gauss, doubling or markov")->capture_default_str();
    app->add_option("--observable", observable,
                    "doubling observable: inverse (floor(1/x), default), indicator (1 on [0,1/2)) or cylinders");
    app->add_option("--level", level, "cylinder length for --observable cylinders")->capture_default_str();
    app->add_option("--cell-values", cell_values, "comma list of the observable on each cell (cylinders, markov)");
    app->add_option("--matrix", matrix, "markov transition matrix, rows separated by ';', entries p/q");
  }

  SystemModel build() const {
    return interpret([&] {
      switch (parse_system_kind(system)) {
        case SystemKind::gauss:
          if (!observable.empty() && observable != "digit") throw UsageError("--observable: gauss supports only digit");
          return SystemModel::gauss();
        case SystemKind::doubling:
          if (observable.empty() || observable == "inverse") return SystemModel::doubling_inverse_fraction();
          if (observable == "indicator") return SystemModel::doubling_indicator();
          if (observable == "cylinders") {
            return SystemModel::doubling_cylinders(level, parse_integer_list(cell_values, "--cell-values"));
          }
          throw UsageError("--observable: unknown doubling observable '" + observable + "'");
        case SystemKind::markov:
          if (matrix.empty()) throw UsageError("--matrix is required for markov");
          return SystemModel::markov(parse_matrix(matrix), parse_integer_list(cell_values, "--cell-values"));
      }
      throw UsageError("--system: unknown system");
    });
  }
};

struct ProfileOptions {
  double p = 1.0;
  double q = 0.0;
  double epsilon = 0.5;

  void add(CLI::App* app) {
    app->add_option("--phi-p", p, "phi(l) = l^p ln(e+l)^q: exponent p")->capture_default_str();
    app->add_option("--phi-q", q, "log exponent q (q >= -p)")->capture_default_str();
    app->add_option("--epsilon", epsilon, "trimming parameter")->capture_default_str();
  }

  TailProfile build() const {
    return interpret([&] { return TailProfile(p, q, epsilon); });
  }
};

struct MixingOptions {
  std::string mode;
  std::int64_t cap = 10;
  double constant = 1.0;
  std::int64_t horizon = 200;
  std::size_t empirical_samples = 64;
  std::size_t empirical_length = 20'000;

  void add(CLI::App* app) {
    app->add_option("--gmode", mode, "exact, empirical or asserted (default: asserted for gauss, exact otherwise)");
    app->add_option("--gcap", cap, "largest cell index in the sup over cell pairs")->capture_default_str();
    app->add_option("--gconst", constant, "constant g for the asserted mode")->capture_default_str();
    app->add_option("--gn", horizon, "largest N at which g is computed; held constant beyond")
        ->capture_default_str();
    app->add_option("--emp-samples", empirical_samples, "orbits for empirical correlations")->capture_default_str();
    app->add_option("--emp-length", empirical_length, "orbit length for empirical correlations")
        ->capture_default_str();
  }

  MixingProfile build(const SystemModel& system, std::uint64_t seed, std::int64_t n_max) const {
    const std::optional<MixingMode> chosen =
        mode.empty() ? std::nullopt : std::optional(interpret([&] { return parse_mixing_mode(mode); }));
    EmpiricalOptions options;
    options.samples = empirical_samples;
    options.orbit_length = empirical_length;
    options.base_seed = seed;
    if (chosen == MixingMode::asserted || (!chosen && system.partition() == PartitionKind::gauss_digits)) {
      return interpret([&] { return estimate_g(system, 1, cap, MixingMode::asserted, options, constant); });
    }
    const std::int64_t n = std::min(n_max, horizon);
    return interpret([&] { return estimate_g(system, n, cap, chosen, options, constant); });
  }

  nlohmann::json describe(const MixingProfile& profile) const {
    return {{"mode", to_string(profile.mode)},
            {"cell_cap", cap},
            {"asserted_constant", constant},
            {"n_max", profile.n_max()}};
  }
};

struct OutputOptions {
  std::string format;
  std::string out;

  void add(CLI::App* app, const std::string& formats) {
    app->add_option("--format", format, formats);
    app->add_option("--out", out, "output file (default: standard output)");
  }

  std::string resolved(const std::string& fallback) const { return format.empty() ? fallback : format; }
};

void emit(const OutputOptions& options, std::ostream& stdout_stream, const std::function<void(std::ostream&)>& body) {
  if (options.out.empty()) {
    body(stdout_stream);
  } else {
    write_file(options.out, body);
  }
}

Format data_format(const OutputOptions& options) {
  return interpret([&] { return parse_format(options.resolved("csv")); });
}

nlohmann::json profile_json(const TailProfile& profile) {
  return {{"p", profile.p()}, {"q", profile.q()}, {"epsilon", profile.epsilon()}};
}

std::function<void(const std::string&)> progress_log(bool enabled, std::ostream& err) {
  if (!enabled) return {};
  return [&err](const std::string& line) { err << line << '\n'; };
}

}  // namespace

int parse_and_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Trimmed Birkhoff sums of heavy-tailed observables", "trimlab"};
  app.set_config("--config", "", "INI file with one [subcommand] section of flag = value lines");
  app.require_subcommand(1);
  app.fallthrough();
  app.failure_message(CLI::FailureMessage::help);
  std::function<int()> action;

  // digits
  auto* digits = app.add_subcommand("digits", "orbit digits of a random or exact point");
  SystemOptions digits_system;
  digits_system.add(digits);
  std::uint64_t digits_seed = 1;
  std::string digits_n, digits_x, digits_quadratic;
  OutputOptions digits_output;
  digits->add_option("--seed", digits_seed, "seed of the random point")->capture_default_str();
  digits->add_option("--n", digits_n, "number of digits")->required();
  digits->add_option("--x", digits_x, "exact rational point p/q instead of a random one");
  digits->add_option("--quadratic", digits_quadratic, "quadratic irrational (p + r sqrt(d))/q given as p,r,d,q");
  digits_output.add(digits, "text (default), csv or json");
  digits->callback([&] {
    action = [&]() -> int {
      const SystemModel system = digits_system.build();
      const std::int64_t n = parse_integer(digits_n, "--n");
      if (n < 0) throw UsageError("--n must be >= 0");
      const auto count = static_cast<std::size_t>(n);
      OrbitDigits path;
      if (!digits_quadratic.empty()) {
        if (system.partition() != PartitionKind::gauss_digits) throw UsageError("--quadratic needs --system gauss");
        const auto x = interpret([&] { return parse_quadratic(digits_quadratic); });
        path = gauss_digits(x, count);
      } else if (!digits_x.empty()) {
        const mpq_class x = interpret([&] { return parse_rational(digits_x); });
        if (system.partition() == PartitionKind::gauss_digits) {
          path = gauss_digits(x, count);
        } else if (system.partition() == PartitionKind::doubling_inverse) {
          path = doubling_orbit(x, count);
        } else {
          throw UsageError("--x is supported for gauss and the doubling inverse observable");
        }
      } else {
        LazyUniformReal x = sample_real(digits_seed);
        path = orbit(system, x, count);
      }
      const std::string format = digits_output.resolved("text");
      nlohmann::json config = {{"system", system.name()}, {"n", n}};
      if (!digits_quadratic.empty()) {
        config["quadratic"] = digits_quadratic;
      } else if (!digits_x.empty()) {
        config["x"] = digits_x;
      } else {
        config["seed"] = digits_seed;
      }
      emit(digits_output, out, [&](std::ostream& o) {
        if (format == "text") {
          for (std::size_t k = 0; k < path.values.size(); ++k) o << (k ? " " : "") << path.values[k];
          o << '\n';
        } else if (format == "csv") {
          o << "# config " << config.dump() << "\nindex,symbol,value\n";
          for (std::size_t k = 0; k < path.values.size(); ++k) {
            o << k << ',' << path.symbols[k] << ',' << path.values[k] << '\n';
          }
        } else if (format == "json") {
          o << nlohmann::json{{"config", config}, {"symbols", path.symbols}, {"values", path.values}}.dump(2)
            << '\n';
        } else {
          throw UsageError("--format: expected text, csv or json");
        }
      });
      return exit_ok;
    };
  });

  // trim
  auto* trim_cmd = app.add_subcommand("trim", "trimmed Birkhoff sum of given values or of an orbit");
  std::string trim_values, trim_n;
  std::optional<double> trim_threshold;
  std::uint64_t trim_seed = 1;
  SystemOptions trim_system;
  ProfileOptions trim_profile;
  OutputOptions trim_output;
  trim_cmd->add_option("--values", trim_values, "comma list of non-negative integers");
  trim_cmd->add_option("--threshold", trim_threshold, "trimming threshold (default: tau(N))");
  trim_system.add(trim_cmd);
  trim_profile.add(trim_cmd);
  trim_cmd->add_option("--seed", trim_seed, "seed of the random point")->capture_default_str();
  trim_cmd->add_option("--n", trim_n, "orbit length when --values is absent");
  trim_output.add(trim_cmd, "text (default), csv or json");
  trim_cmd->callback([&] {
    action = [&]() -> int {
      std::vector<std::int64_t> values;
      std::uint64_t seed = 0;
      double threshold = 0;
      if (!trim_values.empty()) {
        values = parse_integer_list(trim_values, "--values");
        if (trim_threshold) {
          threshold = *trim_threshold;
        } else {
          if (values.size() < 2) throw UsageError("--threshold is required for fewer than two values");
          threshold = tau(trim_profile.build(), static_cast<std::int64_t>(values.size()));
        }
      } else {
        if (trim_n.empty()) throw UsageError("either --values or --n is required");
        const std::int64_t n = parse_integer(trim_n, "--n");
        if (n < 2) throw UsageError("--n must be >= 2");
        const SystemModel system = trim_system.build();
        LazyUniformReal x = sample_real(trim_seed);
        values = orbit(system, x, static_cast<std::size_t>(n)).values;
        seed = trim_seed;
        threshold = trim_threshold ? *trim_threshold : tau(trim_profile.build(), n);
      }
      if (threshold < 0) throw UsageError("--threshold must be >= 0");
      const auto sum = interpret([&] { return trim<std::int64_t>(values, threshold); });
      const std::string format = trim_output.resolved("text");
      emit(trim_output, out, [&](std::ostream& o) {
        if (format == "text") {
          o << "raw=" << sum.raw_sum << " trimmed=" << sum.trimmed_sum << " delta=" << sum.delta
            << " max=" << sum.max_term << " argmax=" << sum.argmax << " exceedances=" << sum.exceedances
            << " threshold=" << format_double(threshold) << '\n';
        } else if (format == "csv") {
          write_trimmed_csv_header(o);
          write_trimmed_csv_row(o, seed, sum);
        } else if (format == "json") {
          o << nlohmann::json{{"seed", seed},
                              {"N", sum.horizon},
                              {"raw", sum.raw_sum},
                              {"max", sum.max_term},
                              {"argmax", sum.argmax},
                              {"delta", sum.delta},
                              {"exceedances", sum.exceedances},
                              {"trimmed", sum.trimmed_sum},
                              {"threshold", threshold}}
                   .dump(2)
            << '\n';
        } else {
          throw UsageError("--format: expected text, csv or json");
        }
      });
      return exit_ok;
    };
  });

  // mainterm
  auto* mainterm = app.add_subcommand("mainterm", "main-term table F1, F2, G, F3 and tau over a grid");
  SystemOptions main_system;
  ProfileOptions main_profile;
  MixingOptions main_mixing;
  OutputOptions main_output;
  std::string main_grid;
  std::uint64_t main_seed = 1;
  main_system.add(mainterm);
  main_profile.add(mainterm);
  main_mixing.add(mainterm);
  mainterm->add_option("--ngrid", main_grid, "comma list of N, or a:b for a consecutive range")->required();
  mainterm->add_option("--seed", main_seed, "seed for empirical mixing estimates")->capture_default_str();
  main_output.add(mainterm, "csv (default) or json");
  mainterm->callback([&] {
    action = [&]() -> int {
      const SystemModel system = main_system.build();
      const TailProfile profile = main_profile.build();
      const auto grid = parse_grid(main_grid);
      if (grid.empty()) throw UsageError("--ngrid is empty");
      const MixingProfile mixing = main_mixing.build(system, main_seed, grid.back());
      const MainTermTable table = interpret([&] { return build_main_terms(system, profile, mixing.as_function(), grid); });
      const Format format = data_format(main_output);
      const nlohmann::json config = {{"system", system.name()},
                                     {"profile", profile_json(profile)},
                                     {"mixing", main_mixing.describe(mixing)}};
      emit(main_output, out, [&](std::ostream& o) {
        if (format == Format::json) {
          nlohmann::json document = to_json(table);
          document["config"] = config;
          o << document.dump(2) << '\n';
        } else {
          o << "# config " << config.dump() << '\n';
          write_csv(o, table);
        }
      });
      return exit_ok;
    };
  });

  // mixing
  auto* mixing_cmd = app.add_subcommand("mixing", "correlation-sum bound g(N) and its cumulative sum G(N)");
  SystemOptions mix_system;
  MixingOptions mix_options;
  OutputOptions mix_output;
  std::string mix_n;
  std::uint64_t mix_seed = 1;
  bool mix_report = false;
  mix_system.add(mixing_cmd);
  mix_options.add(mixing_cmd);
  mixing_cmd->add_option("--n", mix_n, "largest N")->required();
  mixing_cmd->add_option("--seed", mix_seed, "seed for empirical estimates")->capture_default_str();
  mixing_cmd->add_flag("--report", mix_report, "print the uniformity report at N instead of the profile");
  mix_output.add(mixing_cmd, "csv (default) or json");
  mixing_cmd->callback([&] {
    action = [&]() -> int {
      const SystemModel system = mix_system.build();
      const std::int64_t n = parse_integer(mix_n, "--n");
      if (n < 0) throw UsageError("--n must be >= 0");
      const Format format = data_format(mix_output);
      if (mix_report) {
        EmpiricalOptions options;
        options.samples = mix_options.empirical_samples;
        options.orbit_length = mix_options.empirical_length;
        options.base_seed = mix_seed;
        const bool empirical = mix_options.mode == "empirical" || system.partition() == PartitionKind::gauss_digits;
        const UniformityReport report =
            interpret([&] { return uniformity_report(system, n, mix_options.cap, empirical ? &options : nullptr); });
        emit(mix_output, out, [&](std::ostream& o) {
          if (format == Format::json) {
            nlohmann::json sums = nlohmann::json::array();
            for (Eigen::Index a = 0; a < report.sums.rows(); ++a) {
              nlohmann::json row = nlohmann::json::array();
              for (Eigen::Index b = 0; b < report.sums.cols(); ++b) row.push_back(report.sums(a, b));
              sums.push_back(std::move(row));
            }
            o << nlohmann::json{{"system", system.name()},
                                {"N", report.n},
                                {"cell_cap", report.cell_cap},
                                {"cells", report.cells},
                                {"sums", std::move(sums)},
                                {"max", report.max},
                                {"max_half_cap", report.max_half_cap},
                                {"lagged_max", report.lagged_max},
                                {"lagged_max_half_cap", report.lagged_max_half_cap},
                                {"std_error", report.std_error},
                                {"std_error_half_cap", report.std_error_half_cap},
                                {"grows", report.grows},
                                {"lagged_grows", report.lagged_grows}}
                     .dump(2)
              << '\n';
          } else {
            o << "i,j,sum,lagged\n";
            for (Eigen::Index a = 0; a < report.sums.rows(); ++a) {
              for (Eigen::Index b = 0; b < report.sums.cols(); ++b) {
                o << report.cells[static_cast<std::size_t>(a)] << ',' << report.cells[static_cast<std::size_t>(b)]
                  << ',' << format_double(report.sums(a, b)) << ',' << format_double(report.lagged(a, b)) << '\n';
              }
            }
          }
        });
        return exit_ok;
      }
      MixingOptions options = mix_options;
      options.horizon = n;
      const MixingProfile profile = options.build(system, mix_seed, n);
      emit(mix_output, out, [&](std::ostream& o) {
        if (format == Format::json) {
          nlohmann::json rows = nlohmann::json::array();
          for (std::size_t k = 0; k < profile.g.size(); ++k) {
            rows.push_back({{"N", k}, {"g", profile.g[k]}, {"G", profile.G[k]}});
          }
          nlohmann::json document = certificate_json(profile);
          document["system"] = system.name();
          document["rows"] = std::move(rows);
          o << document.dump(2) << '\n';
        } else {
          write_csv(o, profile);
        }
      });
      return exit_ok;
    };
  });

  // experiment and counterexample share their harness flags
  struct HarnessOptions {
    SystemOptions system;
    ProfileOptions profile;
    MixingOptions mixing;
    OutputOptions output;
    std::string grid = "1000,10000,100000";
    std::size_t samples = 100;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    bool log = false;

    void add(CLI::App* app, const std::string& default_system) {
      system.add(app, default_system);
      profile.add(app);
      app->add_option("--ngrid", grid, "comma list of horizons N")->capture_default_str();
      app->add_option("--samples", samples, "number of seeded samples")->capture_default_str();
      app->add_option("--seed", seed, "base seed")->capture_default_str();
      app->add_option("--threads", threads, "worker threads (default: one per processor)");
      app->add_flag("--log", log, "one progress line per sample on standard error");
      output.add(app, "csv (default) or json");
    }

    ExperimentConfig build(std::ostream& err) const {
      ExperimentConfig config;
      config.system = system.build();
      config.profile = profile.build();
      config.grid = parse_grid(grid);
      config.sample_count = samples;
      config.base_seed = seed;
      config.threads = threads;
      config.log = progress_log(log, err);
      interpret([&] {
        config.validate();
        return 0;
      });
      return config;
    }
  };

  auto* experiment = app.add_subcommand("experiment", "seeded Monte Carlo runs of trimmed or classical sums");
  HarnessOptions experiment_options;
  std::string experiment_kind = "trim";
  experiment_options.add(experiment, "gauss");
  experiment_options.mixing.add(experiment);
  experiment->add_option("--kind", experiment_kind, "trim or classical")->capture_default_str();
  experiment->callback([&] {
    action = [&]() -> int {
      ExperimentConfig config = experiment_options.build(err);
      const Format format = data_format(experiment_options.output);
      if (experiment_kind == "trim") {
        config.mixing = experiment_options.mixing.build(config.system, config.base_seed, config.grid.back());
        const TrimExperiment result = run_trim_experiment(config);
        for (const auto& f : result.failures) err << "sample seed " << f.seed << " failed: " << f.message << '\n';
        nlohmann::json header = config.to_json();
        header["kind"] = experiment_kind;
        if (experiment_options.output.out.empty()) {
          if (format == Format::json) {
            out << trimlab::to_json(result.records, header).dump(2) << '\n';
          } else {
            out << "# config " << header.dump() << '\n';
            write_csv(out, result.records);
          }
        } else {
          persist(result.records, experiment_options.output.out, format, header);
        }
        return result.failures.empty() ? exit_ok : exit_runtime;
      }
      if (experiment_kind == "classical") {
        const ClassicalExperiment result = interpret([&] { return run_classical_experiment(config); });
        for (const auto& f : result.failures) err << "sample seed " << f.seed << " failed: " << f.message << '\n';
        nlohmann::json header = config.to_json();
        header.erase("mixing");
        header["kind"] = experiment_kind;
        header["mean"] = result.mean;
        if (experiment_options.output.out.empty()) {
          if (format == Format::json) {
            out << trimlab::to_json(result.records, header).dump(2) << '\n';
          } else {
            out << "# config " << header.dump() << '\n';
            write_csv(out, result.records);
          }
        } else {
          persist(result.records, experiment_options.output.out, format, header);
        }
        return result.failures.empty() ? exit_ok : exit_runtime;
      }
      throw UsageError("--kind: expected trim or classical");
    };
  });

  auto* counterexample = app.add_subcommand("counterexample", "dispersion of normalized trimmed sums across samples");
  HarnessOptions counter_options;
  std::string normalization = "n-log-n";
  counter_options.add(counterexample, "doubling");
  counterexample->add_option("--normalization", normalization, "F_N: n-log-n, n-squared or linear")
      ->capture_default_str();
  counterexample->callback([&] {
    action = [&]() -> int {
      const ExperimentConfig config = counter_options.build(err);
      const Normalization norm = interpret([&] { return parse_normalization(normalization); });
      const Format format = data_format(counter_options.output);
      const DispersionReport report = run_counterexample(config, norm);
      for (const auto& f : report.failures) err << "sample seed " << f.seed << " failed: " << f.message << '\n';
      nlohmann::json header = config.to_json();
      header.erase("mixing");
      header["normalization"] = to_string(norm);
      if (counter_options.output.out.empty()) {
        if (format == Format::json) {
          out << trimlab::to_json(report.rows, header).dump(2) << '\n';
        } else {
          out << "# config " << header.dump() << '\n';
          write_csv(out, report.rows);
        }
      } else {
        persist(report.rows, counter_options.output.out, format, header);
      }
      return report.failures.empty() ? exit_ok : exit_runtime;
    };
  });

  // check-hypothesis
  auto* check = app.add_subcommand("check-hypothesis", "finite-range growth check of the main-term table");
  SystemOptions check_system;
  ProfileOptions check_profile;
  MixingOptions check_mixing;
  std::string check_grid = "2:10000";
  std::string check_out;
  std::uint64_t check_seed = 1;
  bool adversarial = false;
  check_system.add(check);
  check_profile.add(check);
  check_mixing.add(check);
  check->add_option("--ngrid", check_grid, "consecutive range a:b")->capture_default_str();
  check->add_option("--seed", check_seed, "seed for empirical mixing estimates")->capture_default_str();
  check->add_flag("--adversarial", adversarial, "use a table whose F3 jumps by F3^0.9");
  check->add_option("--out", check_out, "CSV file for the ratio sequences N,r1,r2");
  check->callback([&] {
    action = [&]() -> int {
      const auto grid = parse_grid(check_grid);
      if (grid.size() < 2) throw UsageError("--ngrid needs at least two consecutive values");
      const TailProfile profile = check_profile.build();
      MainTermTable table;
      if (adversarial) {
        std::vector<double> tau(grid.size(), 0.0), f1(grid.size(), 1.0), f2(grid.size()), g(grid.size(), 0.0);
        double f3 = static_cast<double>(grid.front()) + 1.0;
        for (std::size_t k = 0; k < grid.size(); ++k) {
          f2[k] = f3 - static_cast<double>(grid[k]);
          f3 += std::pow(f3, 0.9);
        }
        table = interpret([&] { return MainTermTable::assemble(profile, grid, tau, f1, f2, g); });
      } else {
        const SystemModel system = check_system.build();
        const MixingProfile mixing = check_mixing.build(system, check_seed, grid.back());
        table = interpret([&] { return build_main_terms(system, profile, mixing.as_function(), grid); });
      }
      const GrowthReport report = interpret([&] { return check_growth_hypothesis(table); });
      out << "verdict=" << to_string(report.verdict) << " max_r1=" << format_double(report.max_r1)
          << " max_r2=" << format_double(report.max_r2) << " slope_r1=" << format_double(report.slope_r1)
          << " slope_r2=" << format_double(report.slope_r2)
          << " division_by_zero=" << (report.division_by_zero ? "true" : "false") << '\n';
      if (!check_out.empty()) {
        write_file(check_out, [&](std::ostream& o) {
          o << "N,r1,r2\n";
          for (std::size_t k = 0; k < report.n.size(); ++k) {
            o << report.n[k] << ',' << format_double(report.r1[k]) << ',' << format_double(report.r2[k]) << '\n';
          }
        });
      }
      return exit_ok;
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_usage;
  }
  try {
    return action();
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\nRun with --help for usage.\n";
    return exit_usage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_runtime;
  }
}

}  // namespace trimlab::cli
