#include "trimlab/mainterm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include "trimlab/error.hpp"
#include "trimlab/io.hpp"
#include "trimlab/stats.hpp"

namespace trimlab {

TailProfile::TailProfile(double p, double q, double epsilon) : p_(p), q_(q), epsilon_(epsilon) {
  if (!(p > 0) || !std::isfinite(p)) throw Error(Errc::invalid_argument, "phi exponent p must be > 0");
  if (!std::isfinite(q) || q < -p) throw Error(Errc::invalid_argument, "phi log exponent q must be >= -p");
  if (!(epsilon > 0) || !std::isfinite(epsilon)) throw Error(Errc::invalid_argument, "epsilon must be > 0");
}

double TailProfile::phi(double lambda) const {
  if (lambda <= 0) return 0.0;
  return std::pow(lambda, p_) * std::pow(std::log(std::numbers::e + lambda), q_);
}

double cutoff_argument(const TailProfile& profile, std::int64_t n) {
  if (n < 2) throw Error(Errc::invalid_argument, "cutoff needs N >= 2");
  const double nn = static_cast<double>(n);
  return nn * std::pow(std::log(nn), 0.5 + profile.epsilon());
}

double tau(const TailProfile& profile, std::int64_t n) {
  const double target = cutoff_argument(profile, n);
  double lo = 0.0;
  double hi = 1.0;
  int doublings = 0;
  while (profile.phi(hi) < target) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 1000 || !std::isfinite(hi)) {
      throw Error(Errc::nonconvergence, "cannot bracket phi^-1 of " + format_double(target));
    }
  }
  for (int iteration = 0; iteration < 2000; ++iteration) {
    if (hi - lo <= 1e-12 * hi) return 0.5 * (lo + hi);
    const double mid = 0.5 * (lo + hi);
    if (profile.phi(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  throw Error(Errc::nonconvergence, "bisection for phi^-1 did not converge");
}

double gauss_digit_probability(std::int64_t n) {
  if (n < 1) throw Error(Errc::invalid_argument, "Gauss digits are >= 1");
  const double nn = static_cast<double>(n);
  return std::log1p(1.0 / (nn * (nn + 2.0))) / std::numbers::ln2;
}

namespace {

// Below this cell index countable families are summed term by term.
constexpr std::int64_t kDirectLimit = std::int64_t{1} << 22;

// psi(x) - psi(y) for large x >= y.
double digamma_difference(double x, double y) {
  const auto tail = [](double t) {
    const double t2 = t * t;
    return -1.0 / (2.0 * t) - 1.0 / (12.0 * t2) + 1.0 / (120.0 * t2 * t2);
  };
  return std::log1p((x - y) / y) + tail(x) - tail(y);
}

// Sum over n in (a, b] of n^power * mu(A_n) from asymptotic expansions.
double countable_tail(PartitionKind partition, int power, double a, double b) {
  if (b <= a) return 0.0;
  if (partition == PartitionKind::doubling_inverse) {
    // n mu = 1/(n+1), n^2 mu = 1 - 1/(n+1)
    const double harmonic = digamma_difference(b + 2.0, a + 2.0);
    return power == 1 ? harmonic : (b - a) - harmonic;
  }
  // Gauss: n log1p(u) with u = 1/(n(n+2)) expanded in u.
  const double harmonic = digamma_difference(b + 3.0, a + 3.0);
  if (power == 1) {
    const double cubic = 0.5 * (1.0 / ((a + 0.5) * (a + 0.5)) - 1.0 / ((b + 0.5) * (b + 0.5)));
    return (harmonic - 0.5 * cubic) / std::numbers::ln2;
  }
  const double square = 1.0 / (a + 2.5) - 1.0 / (b + 2.5);
  return ((b - a) - 2.0 * harmonic - 0.5 * square) / std::numbers::ln2;
}

double countable_term(PartitionKind partition, int power, std::int64_t n) {
  const double nn = static_cast<double>(n);
  const double mu = partition == PartitionKind::doubling_inverse ? 1.0 / (nn * (nn + 1.0))
                                                                 : gauss_digit_probability(n);
  return power == 1 ? nn * mu : nn * nn * mu;
}

struct CompensatedSum {
  double sum = 0.0;
  double compensation = 0.0;

  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      compensation += (sum - t) + v;
    } else {
      compensation += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + compensation; }
};

// Running truncated moments over increasing thresholds.
class MomentAccumulator {
 public:
  MomentAccumulator(const SystemModel& system, int power) : system_(system), power_(power) {}

  Moment at(double threshold) {
    if (threshold < 0 || std::isnan(threshold)) {
      throw Error(Errc::invalid_argument, "threshold must be >= 0");
    }
    const PartitionKind partition = system_.partition();
    if (partition == PartitionKind::gauss_digits || partition == PartitionKind::doubling_inverse) {
      const double top = std::floor(threshold);
      const std::int64_t direct = static_cast<std::int64_t>(std::min(top, static_cast<double>(kDirectLimit)));
      while (reached_ < direct) {
        ++reached_;
        sum_.add(countable_term(partition, power_, reached_));
      }
      double value = sum_.value();
      if (top > static_cast<double>(kDirectLimit)) {
        value += countable_tail(partition, power_, static_cast<double>(kDirectLimit), top);
      }
      return {value, 0.0};
    }

    Moment m;
    const auto count = *system_.cell_count();
    CompensatedSum sum;
    for (std::int64_t i = system_.first_cell(); i < count; ++i) {
      const double v = static_cast<double>(system_.observable_value(i));
      if (v > threshold) continue;
      sum.add(std::pow(v, power_) * system_.cell_measure(i).value);
    }
    m.value = sum.value();
    if (system_.tail_mass() > 0 && threshold >= static_cast<double>(system_.tail_min_value())) {
      m.tail_bound = system_.tail_mass() * std::pow(threshold, power_);
    }
    return m;
  }

 private:
  const SystemModel& system_;
  int power_;
  std::int64_t reached_ = 0;
  CompensatedSum sum_;
};

void check_grid(std::span<const std::int64_t> grid) {
  if (grid.empty()) throw Error(Errc::invalid_argument, "grid is empty");
  if (grid.front() < 2) throw Error(Errc::invalid_argument, "grid values must be >= 2");
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (grid[k] <= grid[k - 1]) throw Error(Errc::invalid_argument, "grid must be strictly increasing");
  }
}

}  // namespace

Moment truncated_moment(const SystemModel& system, double threshold, int power) {
  if (power != 1 && power != 2) throw Error(Errc::invalid_argument, "moment power must be 1 or 2");
  MomentAccumulator accumulator(system, power);
  return accumulator.at(threshold);
}

MainTermTable MainTermTable::assemble(TailProfile profile, std::vector<std::int64_t> grid,
                                      std::vector<double> tau, std::vector<double> F1,
                                      std::vector<double> F2, std::vector<double> G) {
  const std::size_t n = grid.size();
  if (tau.size() != n || F1.size() != n || F2.size() != n || G.size() != n) {
    throw Error(Errc::invalid_argument, "main-term columns differ in length");
  }
  MainTermTable table{profile, std::move(grid), std::move(tau), std::move(F1), std::move(F2), std::move(G), {}};
  table.F3.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    table.F3[k] = table.F1[k] * table.F1[k] * (static_cast<double>(table.grid[k]) + table.G[k]) + table.F2[k];
  }
  return table;
}

std::size_t MainTermTable::index_of(std::int64_t n) const {
  const auto it = std::lower_bound(grid.begin(), grid.end(), n);
  if (it == grid.end() || *it != n) {
    throw Error(Errc::invalid_argument, "N = " + std::to_string(n) + " is not on the grid");
  }
  return static_cast<std::size_t>(it - grid.begin());
}

MainTermTable build_main_terms(const SystemModel& system, const TailProfile& profile,
                               const GFunction& g, std::span<const std::int64_t> grid) {
  check_grid(grid);
  MomentAccumulator first(system, 1);
  MomentAccumulator second(system, 2);
  std::vector<double> taus, f1, f2, big_g;
  CompensatedSum cumulative_g;
  std::int64_t g_reached = 0;
  for (const std::int64_t n : grid) {
    const double t = tau(profile, n);
    const Moment m1 = first.at(t);
    const Moment m2 = second.at(t);
    for (const Moment& m : {m1, m2}) {
      if (m.tail_bound > 1e-6 * m.value) {
        throw Error(Errc::truncation_tail_overflow,
                    "table tail could hide " + format_double(m.tail_bound) + " of a moment " +
                        format_double(m.value) + " at N = " + std::to_string(n));
      }
    }
    while (g_reached < n) {
      ++g_reached;
      const double gn = g(g_reached);
      if (!(gn >= 0)) throw Error(Errc::invalid_argument, "g(n) must be >= 0");
      cumulative_g.add(gn);
    }
    taus.push_back(t);
    f1.push_back(m1.value);
    f2.push_back(m2.value);
    big_g.push_back(cumulative_g.value());
  }
  return MainTermTable::assemble(profile, std::vector<std::int64_t>(grid.begin(), grid.end()), std::move(taus),
                                 std::move(f1), std::move(f2), std::move(big_g));
}

GFunction constant_g(double c) {
  return [c](std::int64_t) { return c; };
}

std::string to_string(GrowthVerdict verdict) {
  return verdict == GrowthVerdict::consistent ? "consistent" : "inconsistent";
}

namespace {

// Slope of log(max r) over dyadic blocks of N against log N.
double block_max_slope(std::span<const std::int64_t> ns, std::span<const double> r) {
  std::vector<std::pair<double, double>> blocks;
  std::size_t k = 0;
  while (k < ns.size()) {
    const int block = static_cast<int>(std::bit_width(static_cast<std::uint64_t>(ns[k]))) - 1;
    double best = -1.0;
    while (k < ns.size() && static_cast<int>(std::bit_width(static_cast<std::uint64_t>(ns[k]))) - 1 == block) {
      best = std::max(best, r[k]);
      ++k;
    }
    if (best > 0) blocks.emplace_back(std::ldexp(1.0, block), best);
  }
  if (blocks.size() < 3) {
    blocks.clear();
    for (std::size_t i = 0; i < ns.size(); ++i) {
      if (r[i] > 0) blocks.emplace_back(static_cast<double>(ns[i]), r[i]);
    }
  }
  if (blocks.size() < 3) return 0.0;
  return fit_exponent(blocks).slope;
}

}  // namespace

GrowthReport check_growth_hypothesis(const MainTermTable& table) {
  if (table.size() < 2) throw Error(Errc::invalid_argument, "growth check needs at least two grid points");
  for (std::size_t k = 1; k < table.size(); ++k) {
    if (table.grid[k] != table.grid[k - 1] + 1) {
      throw Error(Errc::invalid_argument, "growth check needs consecutive N");
    }
  }
  GrowthReport report;
  for (std::size_t k = 0; k + 1 < table.size(); ++k) {
    const double n = static_cast<double>(table.grid[k]);
    const double jump = table.F3[k + 1] - table.F3[k];
    if (!(jump > 0)) {
      report.division_by_zero = true;
      continue;
    }
    report.n.push_back(table.grid[k]);
    report.r1.push_back(((n + 1.0) * table.F1[k + 1] - n * table.F1[k]) / jump);
    report.r2.push_back(jump / std::pow(table.F3[k], 2.0 / 3.0));
  }
  if (!report.r1.empty()) {
    report.max_r1 = *std::max_element(report.r1.begin(), report.r1.end());
    report.max_r2 = *std::max_element(report.r2.begin(), report.r2.end());
  }
  report.slope_r1 = block_max_slope(report.n, report.r1);
  report.slope_r2 = block_max_slope(report.n, report.r2);
  const bool bounded = report.slope_r1 <= growth_slope_tolerance && report.slope_r2 <= growth_slope_tolerance;
  report.verdict = (bounded && !report.division_by_zero) ? GrowthVerdict::consistent : GrowthVerdict::inconsistent;
  return report;
}

void write_csv(std::ostream& out, const MainTermTable& table) {
  out << "N,F1,F2,G,F3,tau\n";
  for (std::size_t k = 0; k < table.size(); ++k) {
    out << table.grid[k] << ',' << format_double(table.F1[k]) << ',' << format_double(table.F2[k]) << ','
        << format_double(table.G[k]) << ',' << format_double(table.F3[k]) << ',' << format_double(table.tau[k])
        << '\n';
  }
}

nlohmann::json to_json(const MainTermTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t k = 0; k < table.size(); ++k) {
    rows.push_back({{"N", table.grid[k]},
                    {"F1", table.F1[k]},
                    {"F2", table.F2[k]},
                    {"G", table.G[k]},
                    {"F3", table.F3[k]},
                    {"tau", table.tau[k]}});
  }
  return {{"profile", {{"p", table.profile.p()}, {"q", table.profile.q()}, {"epsilon", table.profile.epsilon()}}},
          {"rows", std::move(rows)}};
}

}  // namespace trimlab
