#include "trimlab/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "trimlab/dynamics.hpp"
#include "trimlab/error.hpp"
#include "trimlab/io.hpp"
#include "trimlab/lazy_real.hpp"
#include "trimlab/markov.hpp"

namespace trimlab {

std::string to_string(MixingMode mode) {
  switch (mode) {
    case MixingMode::exact:
      return "exact";
    case MixingMode::empirical:
      return "empirical";
    case MixingMode::asserted:
      return "asserted";
  }
  return "asserted";
}

MixingMode parse_mixing_mode(std::string_view text) {
  if (text == "exact") return MixingMode::exact;
  if (text == "empirical") return MixingMode::empirical;
  if (text == "asserted") return MixingMode::asserted;
  throw Error(Errc::invalid_argument, "unknown mixing mode '" + std::string(text) + "'");
}

namespace {

mpq_class power_of_two(std::int64_t n) {
  mpz_class p;
  mpz_setbit(p.get_mpz_t(), static_cast<unsigned long>(n));
  return mpq_class(p);
}

// Lebesgue measure of {s in [0, t) : {2^n s} in [c, d)}.
mpq_class doubling_preimage_cdf(const mpq_class& t, const mpq_class& c, const mpq_class& d, std::int64_t n) {
  const mpq_class scale = power_of_two(n);
  const mpq_class stretched = t * scale;
  mpz_class whole;
  mpz_fdiv_q(whole.get_mpz_t(), stretched.get_num_mpz_t(), stretched.get_den_mpz_t());
  const mpq_class frac = stretched - mpq_class(whole);
  mpq_class partial = std::min(d, frac) - c;
  if (sgn(partial) < 0) partial = 0;
  mpq_class out = (mpq_class(whole) * (d - c) + partial) / scale;
  out.canonicalize();
  return out;
}

void check_pair(const SystemModel& system, std::int64_t i, std::int64_t j, std::int64_t n) {
  if (!system.valid_cell(i)) throw Error(Errc::invalid_cell, "cell " + std::to_string(i) + " of " + system.name());
  if (!system.valid_cell(j)) throw Error(Errc::invalid_cell, "cell " + std::to_string(j) + " of " + system.name());
  if (n < 0) throw Error(Errc::invalid_argument, "lag must be >= 0");
}

Matrix<mpq_class> matrix_power(const Matrix<mpq_class>& base, std::int64_t n) {
  Matrix<mpq_class> result = Matrix<mpq_class>::Identity(base.rows(), base.cols());
  Matrix<mpq_class> square = base;
  while (n > 0) {
    if (n & 1) result = (result * square).eval();
    n >>= 1;
    if (n > 0) square = (square * square).eval();
  }
  return result;
}

// Largest cell index considered under a cap.
std::int64_t last_cell(const SystemModel& system, std::int64_t cell_cap) {
  if (cell_cap < 1) throw Error(Errc::invalid_argument, "cell cap must be >= 1");
  const auto count = system.cell_count();
  return count ? std::min(cell_cap, *count - 1) : cell_cap;
}

std::vector<std::int64_t> cells_up_to(const SystemModel& system, std::int64_t cell_cap) {
  std::vector<std::int64_t> cells;
  for (std::int64_t i = system.first_cell(); i <= last_cell(system, cell_cap); ++i) cells.push_back(i);
  return cells;
}

double lag_zero_term(const SystemModel& system, std::int64_t i, std::int64_t j) {
  return i == j ? 1.0 / system.cell_measure(i).value - 1.0 : -1.0;
}

}  // namespace

mpq_class intersection_measure(const SystemModel& system, std::int64_t i, std::int64_t j, std::int64_t n) {
  check_pair(system, i, j, n);
  switch (system.partition()) {
    case PartitionKind::doubling_cylinders:
    case PartitionKind::doubling_inverse: {
      const auto [a, b] = system.cell_interval(i);
      const auto [c, d] = system.cell_interval(j);
      return doubling_preimage_cdf(b, c, d, n) - doubling_preimage_cdf(a, c, d, n);
    }
    case PartitionKind::markov_states: {
      const Matrix<mpq_class> power = matrix_power(system.transition(), n);
      return system.stationary()(i) * power(i, j);
    }
    default:
      throw Error(Errc::invalid_argument, "no exact intersections for " + system.name());
  }
}

mpq_class correlation_term(const SystemModel& system, std::int64_t i, std::int64_t j, std::int64_t n) {
  const mpq_class joint = intersection_measure(system, i, j, n);
  const mpq_class product = *system.cell_measure(i).exact * *system.cell_measure(j).exact;
  return joint / product - 1;
}

CorrelationSum correlation_sum(const SystemModel& system, std::int64_t i, std::int64_t j, std::int64_t n) {
  check_pair(system, i, j, n);
  if (system.partition() == PartitionKind::gauss_digits) {
    throw Error(Errc::invalid_argument, "Gauss correlations are only available empirically");
  }
  mpq_class sum = 0;
  if (system.partition() == PartitionKind::markov_states) {
    const mpq_class& pj = system.stationary()(j);
    Matrix<mpq_class> power = Matrix<mpq_class>::Identity(system.transition().rows(), system.transition().cols());
    for (std::int64_t lag = 0; lag <= n; ++lag) {
      if (lag > 0) power = (power * system.transition()).eval();
      sum += power(i, j) / pj - 1;
    }
  } else {
    // Cylinder words of length k are independent of bits from position k on.
    const std::int64_t stop =
        system.partition() == PartitionKind::doubling_cylinders ? std::min<std::int64_t>(n, system.level() - 1) : n;
    for (std::int64_t lag = 0; lag <= stop; ++lag) sum += correlation_term(system, i, j, lag);
  }
  sum.canonicalize();
  return {sum.get_d(), 0.0, sum};
}

EmpiricalCorrelations::EmpiricalCorrelations(const SystemModel& system, std::int64_t cell_cap, std::int64_t max_lag,
                                             const EmpiricalOptions& options)
    : system_(system), cell_cap_(last_cell(system, cell_cap)), max_lag_(max_lag) {
  if (max_lag < 0) throw Error(Errc::invalid_argument, "lag must be >= 0");
  if (options.samples < 2) throw Error(Errc::invalid_argument, "empirical correlations need at least 2 orbits");
  if (options.orbit_length < 100 * static_cast<std::size_t>(max_lag)) {
    throw Error(Errc::insufficient_orbit, "orbit length " + std::to_string(options.orbit_length) +
                                              " is below 100 * N = " + std::to_string(100 * max_lag));
  }
  if (system.partition() == PartitionKind::table) {
    throw Error(Errc::invalid_argument, "a table system has no dynamics");
  }
  const std::vector<std::int64_t> cells = cells_up_to(system, cell_cap);
  const std::size_t k = cells.size();
  const std::int64_t first = system.first_cell();
  std::vector<double> measure(k);
  for (std::size_t c = 0; c < k; ++c) measure[c] = system.cell_measure(cells[c]).value;

  const bool gauss = system.partition() == PartitionKind::gauss_digits;
  // Extra digits so T^m x is accurate to double precision at every used m.
  constexpr std::size_t margin = 64;
  const std::size_t length = options.orbit_length;
  const auto lags = static_cast<std::size_t>(max_lag);
  const std::size_t total = options.burn_in + length + lags + margin;

  std::vector<double> weight(k);
  std::vector<double> counts(k * k * (lags + 1));
  for (std::size_t s = 0; s < options.samples; ++s) {
    LazyUniformReal x = sample_real(sample_seed(options.base_seed, s));
    const OrbitDigits path = orbit(system, x, total);
    const std::int64_t* symbols = path.symbols.data() + options.burn_in;
    std::vector<double> point;
    if (gauss) {
      // point[m] = T^m x from the digits ahead of m
      point.assign(length + lags + margin + 1, 0.0);
      for (std::size_t m = length + lags + margin; m-- > 0;) {
        point[m] = 1.0 / (static_cast<double>(symbols[m]) + point[m + 1]);
      }
    }
    std::fill(counts.begin(), counts.end(), 0.0);
    for (std::size_t m = 0; m < length; ++m) {
      if (gauss) {
        // Probability that the digit at m is i given T^{m+1} x = y.
        const double y = point[m + 1];
        for (std::size_t c = 0; c < k; ++c) {
          const double q = static_cast<double>(cells[c]) + y;
          weight[c] = (1.0 + y) / (q * (q + 1.0));
        }
      } else {
        std::fill(weight.begin(), weight.end(), 0.0);
        const std::int64_t sym = symbols[m];
        if (sym >= first && sym <= cell_cap_) weight[static_cast<std::size_t>(sym - first)] = 1.0;
      }
      for (std::size_t lag = 1; lag <= lags; ++lag) {
        const std::int64_t later = symbols[m + lag];
        if (later < first || later > cell_cap_) continue;
        const auto jc = static_cast<std::size_t>(later - first);
        for (std::size_t ic = 0; ic < k; ++ic) counts[(ic * k + jc) * (lags + 1) + lag] += weight[ic];
      }
    }
    std::vector<double> cumulative(k * k * (lags + 1));
    for (std::size_t ic = 0; ic < k; ++ic) {
      for (std::size_t jc = 0; jc < k; ++jc) {
        const std::size_t base = (ic * k + jc) * (lags + 1);
        double running = 0.0;
        for (std::size_t lag = 1; lag <= lags; ++lag) {
          running += counts[base + lag] / (static_cast<double>(length) * measure[ic] * measure[jc]) - 1.0;
          cumulative[base + lag] = running;
        }
      }
    }
    cumulative_.push_back(std::move(cumulative));
  }
}

std::size_t EmpiricalCorrelations::slot(std::int64_t i, std::int64_t j, std::int64_t n) const {
  const std::int64_t first = system_.first_cell();
  for (const std::int64_t c : {i, j}) {
    if (c < first || c > cell_cap_) {
      throw Error(Errc::invalid_cell, "cell " + std::to_string(c) + " is outside the estimated range");
    }
  }
  if (n < 0 || n > max_lag_) throw Error(Errc::insufficient_orbit, "lag " + std::to_string(n) + " was not estimated");
  const auto k = static_cast<std::size_t>(cell_cap_ - first + 1);
  return ((static_cast<std::size_t>(i - first) * k) + static_cast<std::size_t>(j - first)) *
             static_cast<std::size_t>(max_lag_ + 1) +
         static_cast<std::size_t>(n);
}

CorrelationSum EmpiricalCorrelations::lagged_sum(std::int64_t i, std::int64_t j, std::int64_t n) const {
  const std::size_t at = slot(i, j, n);
  const auto count = static_cast<double>(cumulative_.size());
  double mean = 0.0;
  for (const auto& orbit_sums : cumulative_) mean += orbit_sums[at];
  mean /= count;
  double spread = 0.0;
  for (const auto& orbit_sums : cumulative_) spread += (orbit_sums[at] - mean) * (orbit_sums[at] - mean);
  return {mean, std::sqrt(spread / (count - 1.0) / count), std::nullopt};
}

CorrelationSum EmpiricalCorrelations::correlation_sum(std::int64_t i, std::int64_t j, std::int64_t n) const {
  CorrelationSum out = lagged_sum(i, j, n);
  out.value += lag_zero_term(system_, i, j);
  return out;
}

double MixingProfile::at(std::int64_t n) const {
  if (g.empty()) throw Error(Errc::invalid_argument, "empty mixing profile");
  if (n < 0) throw Error(Errc::invalid_argument, "N must be >= 0");
  return g[static_cast<std::size_t>(std::min(n, n_max()))];
}

GFunction MixingProfile::as_function() const {
  return [profile = *this](std::int64_t n) { return profile.at(n); };
}

namespace {

void accumulate_G(MixingProfile& profile) {
  profile.G.assign(profile.g.size(), 0.0);
  for (std::size_t n = 1; n < profile.g.size(); ++n) profile.G[n] = profile.G[n - 1] + profile.g[n];
}

}  // namespace

MixingProfile asserted_profile(double constant, std::int64_t n_max) {
  if (!(constant >= 0) || !std::isfinite(constant)) throw Error(Errc::invalid_argument, "g constant must be >= 0");
  if (n_max < 0) throw Error(Errc::invalid_argument, "N must be >= 0");
  MixingProfile profile;
  profile.mode = MixingMode::asserted;
  profile.asserted_constant = constant;
  profile.g.assign(static_cast<std::size_t>(n_max) + 1, constant);
  accumulate_G(profile);
  return profile;
}

MixingProfile estimate_g(const SystemModel& system, std::int64_t n_max, std::int64_t cell_cap,
                         std::optional<MixingMode> mode, const EmpiricalOptions& options,
                         double asserted_constant) {
  if (n_max < 0) throw Error(Errc::invalid_argument, "N must be >= 0");
  if (cell_cap < 1) throw Error(Errc::invalid_argument, "cell cap must be >= 1");
  const bool gauss = system.partition() == PartitionKind::gauss_digits;
  const MixingMode chosen = mode.value_or(gauss ? MixingMode::asserted : MixingMode::exact);
  if (chosen == MixingMode::asserted) {
    MixingProfile profile = asserted_profile(asserted_constant, n_max);
    profile.cell_cap = cell_cap;
    return profile;
  }
  if (chosen == MixingMode::exact && gauss) {
    throw Error(Errc::invalid_argument, "exact correlation sums are not available for the Gauss map");
  }

  MixingProfile profile;
  profile.mode = chosen;
  profile.cell_cap = last_cell(system, cell_cap);
  profile.g.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
  const std::vector<std::int64_t> cells = cells_up_to(system, cell_cap);

  // running[pair][N]: correlation sum of the pair up to lag N
  auto record = [&](std::int64_t i, std::int64_t j, const std::vector<double>& running) {
    PairCertificate worst{i, j, running[0], 0};
    for (std::size_t n = 0; n < running.size(); ++n) {
      profile.g[n] = std::max(profile.g[n], running[n]);
      if (running[n] > worst.worst) worst = {i, j, running[n], static_cast<std::int64_t>(n)};
    }
    profile.certificate.push_back(worst);
  };

  std::vector<double> running(static_cast<std::size_t>(n_max) + 1);
  if (chosen == MixingMode::empirical) {
    const EmpiricalCorrelations estimates(system, cell_cap, n_max, options);
    for (const std::int64_t i : cells) {
      for (const std::int64_t j : cells) {
        for (std::int64_t n = 0; n <= n_max; ++n) {
          running[static_cast<std::size_t>(n)] = estimates.correlation_sum(i, j, n).value;
        }
        record(i, j, running);
      }
    }
  } else if (system.partition() == PartitionKind::markov_states) {
    const auto k = system.transition().rows();
    std::vector<std::vector<double>> sums(static_cast<std::size_t>(k * k), running);
    Matrix<mpq_class> power = Matrix<mpq_class>::Identity(k, k);
    std::vector<mpq_class> exact(static_cast<std::size_t>(k * k), mpq_class(0));
    for (std::int64_t n = 0; n <= n_max; ++n) {
      if (n > 0) power = (power * system.transition()).eval();
      for (const std::int64_t i : cells) {
        for (const std::int64_t j : cells) {
          const auto at = static_cast<std::size_t>(i * k + j);
          exact[at] += power(i, j) / system.stationary()(j) - 1;
          sums[at][static_cast<std::size_t>(n)] = exact[at].get_d();
        }
      }
    }
    for (const std::int64_t i : cells) {
      for (const std::int64_t j : cells) record(i, j, sums[static_cast<std::size_t>(i * k + j)]);
    }
  } else {
    const bool cylinders = system.partition() == PartitionKind::doubling_cylinders;
    for (const std::int64_t i : cells) {
      for (const std::int64_t j : cells) {
        mpq_class sum = 0;
        for (std::int64_t n = 0; n <= n_max; ++n) {
          if (!cylinders || n < system.level()) sum += correlation_term(system, i, j, n);
          running[static_cast<std::size_t>(n)] = sum.get_d();
        }
        record(i, j, running);
      }
    }
  }
  for (double& v : profile.g) v = std::max(v, 0.0);
  accumulate_G(profile);
  return profile;
}

UniformityReport uniformity_report(const SystemModel& system, std::int64_t n, std::int64_t cell_cap,
                                   const EmpiricalOptions* empirical) {
  if (n < 0) throw Error(Errc::invalid_argument, "N must be >= 0");
  UniformityReport report;
  report.n = n;
  report.cell_cap = last_cell(system, cell_cap);
  report.cells = cells_up_to(system, cell_cap);
  const auto k = static_cast<Eigen::Index>(report.cells.size());
  report.sums.resize(k, k);
  report.lagged.resize(k, k);
  Matrix<double> errors = Matrix<double>::Zero(k, k);

  const bool use_empirical = empirical != nullptr || system.partition() == PartitionKind::gauss_digits;
  std::optional<EmpiricalCorrelations> estimates;
  if (use_empirical) estimates.emplace(system, cell_cap, n, empirical ? *empirical : EmpiricalOptions{});
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = 0; b < k; ++b) {
      const std::int64_t i = report.cells[static_cast<std::size_t>(a)];
      const std::int64_t j = report.cells[static_cast<std::size_t>(b)];
      const CorrelationSum sum = estimates ? estimates->correlation_sum(i, j, n) : correlation_sum(system, i, j, n);
      report.sums(a, b) = sum.value;
      report.lagged(a, b) = sum.value - lag_zero_term(system, i, j);
      errors(a, b) = sum.std_error;
    }
  }

  const std::int64_t half_cap = std::max(report.cells.front(), report.cell_cap / 2);
  const auto half = static_cast<Eigen::Index>(half_cap - report.cells.front() + 1);
  Eigen::Index r = 0, c = 0;
  report.max = report.sums.maxCoeff();
  report.max_half_cap = report.sums.topLeftCorner(half, half).maxCoeff();
  report.lagged_max = report.lagged.maxCoeff(&r, &c);
  report.std_error = errors(r, c);
  report.lagged_max_half_cap = report.lagged.topLeftCorner(half, half).maxCoeff(&r, &c);
  report.std_error_half_cap = errors(r, c);

  const double noise = 3.0 * std::hypot(report.std_error, report.std_error_half_cap);
  const double slack = 1e-12 * std::max(1.0, std::abs(report.max_half_cap));
  report.grows = report.max > report.max_half_cap + slack + noise;
  report.lagged_grows =
      report.lagged_max > report.lagged_max_half_cap + 1e-12 * std::max(1.0, std::abs(report.lagged_max_half_cap)) + noise;
  return report;
}

void write_csv(std::ostream& out, const MixingProfile& profile) {
  out << "N,g,G,mode\n";
  const std::string mode = to_string(profile.mode);
  for (std::size_t n = 0; n < profile.g.size(); ++n) {
    out << n << ',' << format_double(profile.g[n]) << ',' << format_double(profile.G[n]) << ',' << mode << '\n';
  }
}

nlohmann::json certificate_json(const MixingProfile& profile) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const PairCertificate& p : profile.certificate) {
    pairs.push_back({{"i", p.i}, {"j", p.j}, {"worst", p.worst}, {"at_N", p.at_n}});
  }
  return {{"mode", to_string(profile.mode)},
          {"cell_cap", profile.cell_cap},
          {"asserted_constant", profile.asserted_constant},
          {"pairs", std::move(pairs)}};
}

}  // namespace trimlab
