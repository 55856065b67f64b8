#include "trimlab/trimming.hpp"

#include <ostream>

#include "trimlab/dynamics.hpp"

namespace trimlab {

std::int64_t phi_aggregate(const SystemModel& system, const TailProfile& profile,
                           LazyUniformReal& x, std::int64_t n) {
  if (n < 2) throw Error(Errc::invalid_argument, "aggregate needs N >= 2");
  const OrbitDigits path = orbit(system, x, static_cast<std::size_t>(n));
  return phi_aggregate<std::int64_t>(path.values, tau(profile, n));
}

std::vector<std::int64_t> exceedance_curve(std::span<const std::int64_t> values,
                                           const TailProfile& profile,
                                           std::span<const std::int64_t> grid) {
  std::vector<std::int64_t> out;
  out.reserve(grid.size());
  std::int64_t previous = 1;
  for (const std::int64_t n : grid) {
    if (n < 2 || n <= previous) throw Error(Errc::invalid_argument, "grid must be increasing with N >= 2");
    if (n > static_cast<std::int64_t>(values.size())) {
      throw Error(Errc::insufficient_orbit, "orbit shorter than N = " + std::to_string(n));
    }
    previous = n;
    const double threshold = tau(profile, n);
    std::int64_t count = 0;
    for (std::int64_t k = 0; k < n; ++k) {
      if (detail::exceeds(values[static_cast<std::size_t>(k)], threshold)) ++count;
    }
    out.push_back(count);
  }
  return out;
}

std::vector<std::int64_t> exceedance_curve(const SystemModel& system, const TailProfile& profile,
                                           LazyUniformReal& x, std::span<const std::int64_t> grid) {
  if (grid.empty()) return {};
  const OrbitDigits path = orbit(system, x, static_cast<std::size_t>(grid.back()));
  return exceedance_curve(path.values, profile, grid);
}

void write_trimmed_csv_header(std::ostream& out) {
  out << "seed,N,raw,max,argmax,delta,exceedances,trimmed\n";
}

void write_trimmed_csv_row(std::ostream& out, std::uint64_t seed, const TrimmedSum<std::int64_t>& sum) {
  out << seed << ',' << sum.horizon << ',' << sum.raw_sum << ',' << sum.max_term << ',' << sum.argmax << ','
      << sum.delta << ',' << sum.exceedances << ',' << sum.trimmed_sum << '\n';
}

}  // namespace trimlab
