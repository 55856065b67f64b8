#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "trimlab/system_model.hpp"

namespace trimlab {

/// Weak-integrability profile phi(lambda) = lambda^p * ln(e + lambda)^q with
/// the trimming parameter epsilon.
///
/// Requires p > 0 and q >= -p, which keeps phi strictly increasing on
/// [0, inf) with phi(0) = 0.
class TailProfile {
 public:
  TailProfile(double p = 1.0, double q = 0.0, double epsilon = 0.5);

  double p() const noexcept { return p_; }
  double q() const noexcept { return q_; }
  double epsilon() const noexcept { return epsilon_; }

  double phi(double lambda) const;

  /// Optional certified bound on sup phi(lambda) * mu{|f| > lambda}.
  std::optional<double> weak_norm_bound;

 private:
  double p_;
  double q_;
  double epsilon_;
};

/// N * (ln N)^{1/2 + epsilon}, the argument of phi^{-1}. Requires N >= 2.
double cutoff_argument(const TailProfile& profile, std::int64_t n);

/// tau(N) = phi^{-1}(N (ln N)^{1/2+eps}) by bisection to relative 1e-12.
double tau(const TailProfile& profile, std::int64_t n);

/// mu_g{a_1 = n} = log2(1 + 1/(n(n+2))).
double gauss_digit_probability(std::int64_t n);

struct Moment {
  double value = 0.0;
  /// Upper bound on the mass the computation could not see (table tails).
  double tail_bound = 0.0;
};

/// Sum of alpha_i^power * mu(A_i) over cells with alpha_i <= threshold.
Moment truncated_moment(const SystemModel& system, double threshold, int power);

using GFunction = std::function<double(std::int64_t)>;

/// F1, F2, G, F3 and tau over an increasing grid of horizons.
struct MainTermTable {
  TailProfile profile;
  std::vector<std::int64_t> grid;
  std::vector<double> tau;
  std::vector<double> F1;
  std::vector<double> F2;
  std::vector<double> G;
  std::vector<double> F3;

  /// Builds a table from given columns; F3 is assembled as F1^2 (N + G) + F2.
  static MainTermTable assemble(TailProfile profile, std::vector<std::int64_t> grid,
                                std::vector<double> tau, std::vector<double> F1,
                                std::vector<double> F2, std::vector<double> G);

  std::size_t size() const noexcept { return grid.size(); }
  /// Position of horizon n in the grid; throws invalid_argument if absent.
  std::size_t index_of(std::int64_t n) const;
};

MainTermTable build_main_terms(const SystemModel& system, const TailProfile& profile,
                               const GFunction& g, std::span<const std::int64_t> grid);

GFunction constant_g(double c);

enum class GrowthVerdict { consistent, inconsistent };
std::string to_string(GrowthVerdict verdict);

/// Finite-range evidence for (N+1)F1(N+1) - N F1(N) << F3(N+1) - F3(N) << F3(N)^{2/3}.
struct GrowthReport {
  std::vector<std::int64_t> n;
  std::vector<double> r1;
  std::vector<double> r2;
  double max_r1 = 0.0;
  double max_r2 = 0.0;
  /// Log-log slopes of the dyadic-block maxima of r1 and r2.
  double slope_r1 = 0.0;
  double slope_r2 = 0.0;
  bool division_by_zero = false;
  GrowthVerdict verdict = GrowthVerdict::consistent;
};

inline constexpr double growth_slope_tolerance = 0.05;

GrowthReport check_growth_hypothesis(const MainTermTable& table);

void write_csv(std::ostream& out, const MainTermTable& table);
nlohmann::json to_json(const MainTermTable& table);

}  // namespace trimlab
