#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "trimlab/mainterm.hpp"
#include "trimlab/rational.hpp"
#include "trimlab/system_model.hpp"

namespace trimlab {

enum class MixingMode { exact, empirical, asserted };
std::string to_string(MixingMode mode);
MixingMode parse_mixing_mode(std::string_view text);

/// Sum over n = 0..N of mu(A_i & T^-n A_j) / (mu(A_i) mu(A_j)) - 1.
struct CorrelationSum {
  double value = 0.0;
  double std_error = 0.0;
  std::optional<mpq_class> exact;
};

/// mu(A_i & T^-n A_j), exact for doubling and Markov systems.
mpq_class intersection_measure(const SystemModel& system, std::int64_t i, std::int64_t j,
                               std::int64_t n);

/// The n-th summand of the correlation sum, exact.
mpq_class correlation_term(const SystemModel& system, std::int64_t i, std::int64_t j,
                           std::int64_t n);

/// Exact correlation sum; throws invalid_argument for the Gauss map (use
/// EmpiricalCorrelations).
CorrelationSum correlation_sum(const SystemModel& system, std::int64_t i, std::int64_t j,
                               std::int64_t n);

struct EmpiricalOptions {
  std::size_t samples = 64;
  std::size_t orbit_length = 20'000;
  /// Leading digits dropped so each orbit starts close to mu_g.
  std::size_t burn_in = 32;
  std::uint64_t base_seed = 1;
};

/// Monte Carlo estimates of the Gauss-map correlation sums from independent
/// exact orbits. The n = 0 term is known in closed form and is added
/// exactly; lags n >= 1 are estimated by pair frequencies, with standard
/// errors taken across orbits.
class EmpiricalCorrelations {
 public:
  EmpiricalCorrelations(const SystemModel& system, std::int64_t cell_cap, std::int64_t max_lag,
                        const EmpiricalOptions& options = {});

  CorrelationSum correlation_sum(std::int64_t i, std::int64_t j, std::int64_t n) const;
  /// Same sum restricted to lags 1..n.
  CorrelationSum lagged_sum(std::int64_t i, std::int64_t j, std::int64_t n) const;

  std::int64_t cell_cap() const noexcept { return cell_cap_; }
  std::int64_t max_lag() const noexcept { return max_lag_; }

 private:
  std::size_t slot(std::int64_t i, std::int64_t j, std::int64_t n) const;

  SystemModel system_;
  std::int64_t cell_cap_;
  std::int64_t max_lag_;
  // per orbit: running sums over lags 1..n of the estimated terms
  std::vector<std::vector<double>> cumulative_;
};

struct PairCertificate {
  std::int64_t i = 0;
  std::int64_t j = 0;
  double worst = 0.0;
  std::int64_t at_n = 0;
};

/// g(N) and G(N) = g(1) + ... + g(N) for N = 0..n_max.
struct MixingProfile {
  MixingMode mode = MixingMode::asserted;
  std::int64_t cell_cap = 0;
  double asserted_constant = 1.0;
  std::vector<double> g;
  std::vector<double> G;
  std::vector<PairCertificate> certificate;

  std::int64_t n_max() const noexcept { return static_cast<std::int64_t>(g.size()) - 1; }
  /// g(N); past n_max the last value is held (asserted profiles are constant).
  double at(std::int64_t n) const;
  GFunction as_function() const;
};

MixingProfile asserted_profile(double constant, std::int64_t n_max);

/// g(N) = max over cells i, j within the cap of the correlation sum,
/// clamped below at 0. Exact for doubling/Markov; the Gauss map uses the
/// asserted constant unless `mode` is empirical.
MixingProfile estimate_g(const SystemModel& system, std::int64_t n_max, std::int64_t cell_cap,
                         std::optional<MixingMode> mode = std::nullopt,
                         const EmpiricalOptions& options = {}, double asserted_constant = 1.0);

/// All correlation sums up to a cell cap, and whether their maximum moves
/// when the cap is halved. The lag-0 diagonal term 1/mu(A_i) - 1 alone grows
/// without bound on countable partitions, so the lagged part (n >= 1) is
/// reported separately.
struct UniformityReport {
  std::int64_t n = 0;
  std::int64_t cell_cap = 0;
  std::vector<std::int64_t> cells;
  Matrix<double> sums;
  Matrix<double> lagged;
  double max = 0.0;
  double max_half_cap = 0.0;
  double lagged_max = 0.0;
  double lagged_max_half_cap = 0.0;
  /// Standard error of the lagged maximum (0 when exact).
  double std_error = 0.0;
  double std_error_half_cap = 0.0;
  bool grows = false;
  bool lagged_grows = false;
};

UniformityReport uniformity_report(const SystemModel& system, std::int64_t n,
                                   std::int64_t cell_cap,
                                   const EmpiricalOptions* empirical = nullptr);

/// CSV N,g,G,mode.
void write_csv(std::ostream& out, const MixingProfile& profile);
nlohmann::json certificate_json(const MixingProfile& profile);

}  // namespace trimlab
