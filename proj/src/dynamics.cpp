#include "trimlab/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "trimlab/error.hpp"
#include "trimlab/markov.hpp"

namespace trimlab {

namespace {

using u128 = unsigned __int128;

std::int64_t checked_value(const mpz_class& v) {
  if (!v.fits_slong_p()) throw Error(Errc::digit_overflow, "observable value exceeds 64 bits");
  return v.get_si();
}

// floor(1 / z) for z = {2^n x}, whose binary digits start at bit n of x.
std::int64_t inverse_fraction_floor(LazyUniformReal& x, std::size_t n, std::size_t budget,
                                    std::size_t& bits_used) {
  const std::uint64_t u = x.bits_at(n);
  bits_used = std::max(bits_used, n + 64);
  if (u != 0) {
    // z in (u / 2^64, (u + 1) / 2^64), so 1/z in (2^64 / (u+1), 2^64 / u).
    const u128 two64 = static_cast<u128>(1) << 64;
    const u128 m = two64 / (static_cast<u128>(u) + 1);
    if (two64 <= (m + 1) * u) {
      if (m > static_cast<u128>(INT64_MAX)) throw Error(Errc::digit_overflow, "value exceeds 64 bits");
      return static_cast<std::int64_t>(m);
    }
  }
  // Widen the window until the floor is pinned down.
  mpz_class window = u;
  for (std::size_t width = 128;; width += 64) {
    if (n + width > budget) {
      throw Error(Errc::refinement_budget_exceeded, "more than " + std::to_string(budget) + " bits needed");
    }
    bits_used = std::max(bits_used, n + width);
    mpz_mul_2exp(window.get_mpz_t(), window.get_mpz_t(), 64);
    window += x.bits_at(n + width - 64);
    if (sgn(window) == 0) continue;
    mpz_class scale;
    mpz_setbit(scale.get_mpz_t(), width);
    mpz_class m;
    mpz_class upper = window + 1;
    mpz_fdiv_q(m.get_mpz_t(), scale.get_mpz_t(), upper.get_mpz_t());
    if (scale <= (m + 1) * window) return checked_value(m);
  }
}

// Markov sample path: the Lebesgue-uniform x is coded through nested
// intervals whose lengths are the cylinder measures.
// Each step reads fresh bits of x as a uniform u until the dyadic interval
// known for u fits between two consecutive cumulative probabilities of the
// current row; the state is the index of that gap. The symbols therefore
// follow the stationary chain exactly and use O(1) expected bits per step.
OrbitDigits markov_orbit(const SystemModel& system, LazyUniformReal& x, std::size_t n,
                         std::size_t budget) {
  const auto& transition = system.transition();
  const auto& stationary = system.stationary();
  const Eigen::Index states = transition.rows();
  // cumulative[r][s] = sum of row r below s; row `states` is the stationary law
  std::vector<std::vector<mpq_class>> cumulative(static_cast<std::size_t>(states) + 1);
  for (Eigen::Index r = 0; r <= states; ++r) {
    auto& row = cumulative[static_cast<std::size_t>(r)];
    row.push_back(0);
    for (Eigen::Index s = 0; s < states; ++s) {
      row.push_back(row.back() + (r == states ? stationary(s) : transition(r, s)));
    }
  }
  OrbitDigits out;
  out.symbols.reserve(n);
  out.values.reserve(n);
  std::size_t position = 0;
  std::int64_t previous = states;
  mpz_class k, scaled;
  while (out.symbols.size() < n) {
    const auto& row = cumulative[static_cast<std::size_t>(previous)];
    k = 0;
    std::size_t depth = 0;
    std::int64_t chosen = -1;
    while (chosen < 0) {
      if (position >= budget) {
        throw Error(Errc::refinement_budget_exceeded, "more than " + std::to_string(budget) + " bits needed");
      }
      k = 2 * k + (x.bit(position++) ? 1 : 0);
      ++depth;
      // the gap s with row[s] <= k/2^depth and (k+1)/2^depth <= row[s+1]
      for (Eigen::Index s = 0; s < states; ++s) {
        const mpq_class& a = row[static_cast<std::size_t>(s)];
        const mpq_class& b = row[static_cast<std::size_t>(s) + 1];
        if (a == b) continue;
        scaled = a.get_num() << static_cast<mp_bitcnt_t>(depth);
        if (k * a.get_den() < scaled) break;
        scaled = b.get_num() << static_cast<mp_bitcnt_t>(depth);
        if ((k + 1) * b.get_den() <= scaled) {
          chosen = s;
          break;
        }
      }
    }
    out.symbols.push_back(chosen);
    out.values.push_back(system.observable_value(chosen));
    previous = chosen;
  }
  out.bits_used = position;
  return out;
}

}  // namespace

OrbitDigits doubling_orbit(LazyUniformReal& x, std::size_t n, std::optional<std::size_t> bit_budget) {
  if (n < 1) throw Error(Errc::invalid_argument, "doubling_orbit needs N >= 1");
  const std::size_t budget = bit_budget.value_or(default_bit_budget(n));
  OrbitDigits out;
  out.symbols.reserve(n);
  out.values.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.symbols.push_back(x.bit(k) ? 1 : 0);
    out.values.push_back(inverse_fraction_floor(x, k, budget, out.bits_used));
  }
  return out;
}

OrbitDigits doubling_orbit(const mpq_class& x, std::size_t n) {
  if (n < 1) throw Error(Errc::invalid_argument, "doubling_orbit needs N >= 1");
  const mpz_class& q = x.get_den();
  mpz_class r;
  mpz_fdiv_r(r.get_mpz_t(), x.get_num().get_mpz_t(), q.get_mpz_t());
  OrbitDigits out;
  for (std::size_t k = 0; k < n; ++k) {
    if (sgn(r) == 0) {
      throw Error(Errc::invalid_argument, "orbit reaches 0 at step " + std::to_string(k));
    }
    out.symbols.push_back(2 * r >= q ? 1 : 0);
    mpz_class m;
    mpz_fdiv_q(m.get_mpz_t(), q.get_mpz_t(), r.get_mpz_t());
    out.values.push_back(checked_value(m));
    r = 2 * r;
    if (r >= q) r -= q;
  }
  return out;
}

OrbitDigits orbit(const SystemModel& system, LazyUniformReal& x, std::size_t n,
                  std::optional<std::size_t> bit_budget) {
  if (n < 1) throw Error(Errc::invalid_argument, "orbit needs N >= 1");
  const std::size_t budget = bit_budget.value_or(default_bit_budget(n));
  switch (system.partition()) {
    case PartitionKind::gauss_digits:
      return gauss_digits(x, n, budget);
    case PartitionKind::doubling_inverse: {
      OrbitDigits out = doubling_orbit(x, n, budget);
      out.symbols = out.values;
      return out;
    }
    case PartitionKind::doubling_cylinders: {
      const int level = system.level();
      OrbitDigits out;
      out.symbols.reserve(n);
      out.values.reserve(n);
      for (std::size_t k = 0; k < n; ++k) {
        const std::uint64_t window = x.bits_at(k);
        const std::int64_t cell = level == 0 ? 0 : static_cast<std::int64_t>(window >> (64 - level));
        out.symbols.push_back(cell);
        out.values.push_back(system.observable_value(cell));
      }
      out.bits_used = n + static_cast<std::size_t>(level);
      return out;
    }
    case PartitionKind::markov_states:
      return markov_orbit(system, x, n, budget);
    case PartitionKind::table:
      break;
  }
  throw Error(Errc::invalid_argument, "system '" + system.name() + "' has no dynamics");
}

std::pair<mpq_class, mpq_class> gauss_cylinder_interval(std::span<const std::int64_t> word) {
  mpz_class p_prev = 1, p = 0;
  mpz_class q_prev = 0, q = 1;
  for (const std::int64_t a : word) {
    if (a < 1) throw Error(Errc::invalid_symbol, "Gauss digits are >= 1");
    mpz_class p_next = mpz_class(a) * p + p_prev;
    mpz_class q_next = mpz_class(a) * q + q_prev;
    p_prev = std::move(p);
    q_prev = std::move(q);
    p = std::move(p_next);
    q = std::move(q_next);
  }
  // Points with these digits: [0; a_1..a_k + t], t in [0, 1).
  mpq_class first(p, q);
  mpq_class second(mpz_class(p + p_prev), mpz_class(q + q_prev));
  first.canonicalize();
  second.canonicalize();
  if (first > second) std::swap(first, second);
  return {first, second};
}

double gauss_measure(double a, double b) {
  if (!(0.0 <= a && a <= b && b <= 1.0)) {
    throw Error(Errc::invalid_interval, "need 0 <= a <= b <= 1");
  }
  return std::log1p((b - a) / (1.0 + a)) / std::numbers::ln2;
}

double gauss_measure(const mpq_class& a, const mpq_class& b) {
  if (!(0 <= a && a <= b && b <= 1)) throw Error(Errc::invalid_interval, "need 0 <= a <= b <= 1");
  const mpq_class ratio = (b - a) / (1 + a);
  return log1p_rational(ratio) / std::numbers::ln2;
}

Measure cylinder_measure(const SystemModel& system, std::span<const std::int64_t> word) {
  switch (system.kind()) {
    case SystemKind::doubling: {
      for (const std::int64_t s : word) {
        if (s != 0 && s != 1) throw Error(Errc::invalid_symbol, "doubling words are binary");
      }
      mpz_class den;
      mpz_setbit(den.get_mpz_t(), word.size());
      mpq_class m(mpz_class(1), den);
      m.canonicalize();
      return {m.get_d(), m};
    }
    case SystemKind::markov: {
      const auto states = system.transition().rows();
      for (const std::int64_t s : word) {
        if (s < 0 || s >= states) throw Error(Errc::invalid_symbol, "Markov state out of range");
      }
      mpq_class m = markov_cylinder_measure(system.stationary(), system.transition(), word);
      return {m.get_d(), m};
    }
    case SystemKind::gauss: {
      const auto [a, b] = gauss_cylinder_interval(word);
      return {gauss_measure(a, b), std::nullopt};
    }
  }
  throw Error(Errc::invalid_argument, "unknown system");
}

}  // namespace trimlab
