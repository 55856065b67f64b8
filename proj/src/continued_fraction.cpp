#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include "trimlab/dynamics.hpp"
#include "trimlab/error.hpp"

namespace trimlab {

namespace {

using u128 = unsigned __int128;
using i128 = __int128;

// Leading parts handed to the single-word simulation are at most this wide.
constexpr std::size_t kLeadingBits = 124;
// Cofactors of a batch must fit a signed long for mpz_mul_si.
constexpr i128 kCofactorLimit = static_cast<i128>(1) << 62;
constexpr std::size_t kFeedWords = 3;

void addmul_signed(mpz_t rop, const mpz_t op, long factor) {
  if (factor >= 0) {
    mpz_addmul_ui(rop, op, static_cast<unsigned long>(factor));
  } else {
    mpz_submul_ui(rop, op, static_cast<unsigned long>(-factor));
  }
}

i128 magnitude(i128 v) { return v < 0 ? -v : v; }

// Continued-fraction expansion of every point of an interval at once.
//
// Endpoint e (tail y = 0 or y = 1) of the current iterate T^n x is
// num_[e] / den_[e]; points in between are the linear-fractional
// interpolation, so the digit floor(den/num) is certified when both
// endpoint ratios fall in [q, q+1].
class ContinuedFractionEngine {
 public:
  ContinuedFractionEngine(LazyUniformReal& source, std::size_t budget)
      : source_(&source), budget_(budget) {
    num_[0] = 0;
    num_[1] = 1;
    den_[0] = 1;
    den_[1] = 1;
  }

  // 0 <= num < den, an exact rational.
  ContinuedFractionEngine(const mpz_class& num, const mpz_class& den) {
    num_[0] = num_[1] = num;
    den_[0] = den_[1] = den;
  }

  void run(std::vector<std::int64_t>& digits, std::size_t n) {
    while (digits.size() < n) {
      if (lehmer_batch(digits, n - digits.size()) > 0) continue;
      if (exact_step(digits)) continue;
      if (source_ == nullptr) {
        throw Error(Errc::expansion_terminated,
                    "rational expansion has only " + std::to_string(digits.size()) + " digits");
      }
      feed();
    }
  }

  std::size_t bits_used() const noexcept { return bits_used_; }

 private:
  u128 leading(const mpz_class& x, std::size_t shift) {
    mpz_fdiv_q_2exp(scratch_.get_mpz_t(), x.get_mpz_t(), shift);
    const mp_limb_t lo = mpz_getlimbn(scratch_.get_mpz_t(), 0);
    const mp_limb_t hi = mpz_size(scratch_.get_mpz_t()) > 1 ? mpz_getlimbn(scratch_.get_mpz_t(), 1) : 0;
    return (static_cast<u128>(hi) << 64) | lo;
  }

  // Runs Euclid on the leading bits with interval bounds and applies the
  // accumulated cofactor matrix once. Returns the number of digits emitted.
  std::size_t lehmer_batch(std::vector<std::int64_t>& digits, std::size_t want) {
    const std::size_t bits = std::max(mpz_sizeinbase(den_[0].get_mpz_t(), 2),
                                      mpz_sizeinbase(den_[1].get_mpz_t(), 2));
    if (bits <= kLeadingBits) return 0;
    const std::size_t shift = bits - kLeadingBits;

    u128 num_lo[2], num_hi[2], den_lo[2], den_hi[2];
    for (int e = 0; e < 2; ++e) {
      num_lo[e] = leading(num_[e], shift);
      num_hi[e] = num_lo[e] + 1;
      den_lo[e] = leading(den_[e], shift);
      den_hi[e] = den_lo[e] + 1;
    }

    // (num', den') = (m00 num + m01 den, m10 num + m11 den)
    i128 m00 = 1, m01 = 0, m10 = 0, m11 = 1;
    std::size_t count = 0;
    while (count < want) {
      if (num_lo[0] == 0 || num_lo[1] == 0) break;
      const u128 q = std::min(den_lo[0] / num_hi[0], den_lo[1] / num_hi[1]);
      if (den_hi[0] > (q + 1) * num_lo[0] || den_hi[1] > (q + 1) * num_lo[1]) break;
      if (q >= static_cast<u128>(kCofactorLimit)) break;
      const i128 qs = static_cast<i128>(q);
      const i128 a = m10 - qs * m00;
      const i128 b = m11 - qs * m01;
      if (magnitude(a) >= kCofactorLimit || magnitude(b) >= kCofactorLimit) break;
      m10 = m00;
      m11 = m01;
      m00 = a;
      m01 = b;
      for (int e = 0; e < 2; ++e) {
        const u128 next_lo = den_lo[e] - q * num_hi[e];
        const u128 next_hi = den_hi[e] - q * num_lo[e];
        den_lo[e] = num_lo[e];
        den_hi[e] = num_hi[e];
        num_lo[e] = next_lo;
        num_hi[e] = next_hi;
      }
      digits.push_back(static_cast<std::int64_t>(q));
      ++count;
    }
    if (count == 0) return 0;

    for (int e = 0; e < 2; ++e) {
      mpz_mul_si(t0_.get_mpz_t(), num_[e].get_mpz_t(), static_cast<long>(m00));
      addmul_signed(t0_.get_mpz_t(), den_[e].get_mpz_t(), static_cast<long>(m01));
      mpz_mul_si(t1_.get_mpz_t(), num_[e].get_mpz_t(), static_cast<long>(m10));
      addmul_signed(t1_.get_mpz_t(), den_[e].get_mpz_t(), static_cast<long>(m11));
      mpz_swap(num_[e].get_mpz_t(), t0_.get_mpz_t());
      mpz_swap(den_[e].get_mpz_t(), t1_.get_mpz_t());
    }
    return count;
  }

  bool exact_step(std::vector<std::int64_t>& digits) {
    if (sgn(num_[0]) == 0 || sgn(num_[1]) == 0) return false;
    mpz_fdiv_q(t0_.get_mpz_t(), den_[0].get_mpz_t(), num_[0].get_mpz_t());
    mpz_fdiv_q(t1_.get_mpz_t(), den_[1].get_mpz_t(), num_[1].get_mpz_t());
    const mpz_class q = (t0_ < t1_) ? t0_ : t1_;
    mpz_class rest[2];
    for (int e = 0; e < 2; ++e) {
      rest[e] = den_[e] - q * num_[e];
      if (rest[e] > num_[e]) return false;
    }
    if (!q.fits_slong_p()) throw Error(Errc::digit_overflow, "continued-fraction digit exceeds 64 bits");
    for (int e = 0; e < 2; ++e) {
      den_[e] = std::move(num_[e]);
      num_[e] = std::move(rest[e]);
    }
    digits.push_back(q.get_si());
    return true;
  }

  // Reveals the next bits: y = (w + y') / 2^64 for each new word w.
  void feed() {
    for (std::size_t k = 0; k < kFeedWords; ++k) {
      if (bits_used_ + 64 > budget_) {
        throw Error(Errc::refinement_budget_exceeded,
                    "more than " + std::to_string(budget_) + " bits needed");
      }
      const std::uint64_t w = source_->word(bits_used_ / 64);
      bits_used_ += 64;
      for (mpz_class* pair : {num_, den_}) {
        mpz_sub(t0_.get_mpz_t(), pair[1].get_mpz_t(), pair[0].get_mpz_t());
        mpz_mul_2exp(pair[0].get_mpz_t(), pair[0].get_mpz_t(), 64);
        mpz_addmul_ui(pair[0].get_mpz_t(), t0_.get_mpz_t(), w);
        mpz_add(pair[1].get_mpz_t(), pair[0].get_mpz_t(), t0_.get_mpz_t());
      }
    }
  }

  LazyUniformReal* source_ = nullptr;
  std::size_t budget_ = 0;
  std::size_t bits_used_ = 0;
  mpz_class num_[2];
  mpz_class den_[2];
  mpz_class t0_, t1_, scratch_;
};

OrbitDigits digits_orbit(std::vector<std::int64_t> digits, std::size_t bits_used) {
  OrbitDigits out;
  out.values = digits;
  out.symbols = std::move(digits);
  out.exact = true;
  out.bits_used = bits_used;
  return out;
}

}  // namespace

LazyUniformReal sample_real(std::uint64_t seed) { return LazyUniformReal(seed); }

OrbitDigits gauss_digits(LazyUniformReal& x, std::size_t n, std::optional<std::size_t> bit_budget) {
  if (n < 1) throw Error(Errc::invalid_argument, "gauss_digits needs N >= 1");
  ContinuedFractionEngine engine(x, bit_budget.value_or(default_bit_budget(n)));
  std::vector<std::int64_t> digits;
  digits.reserve(n);
  engine.run(digits, n);
  return digits_orbit(std::move(digits), engine.bits_used());
}

OrbitDigits gauss_digits(const mpq_class& x, std::size_t n) {
  if (n < 1) throw Error(Errc::invalid_argument, "gauss_digits needs N >= 1");
  mpz_class frac_num;
  mpz_fdiv_r(frac_num.get_mpz_t(), x.get_num().get_mpz_t(), x.get_den().get_mpz_t());
  ContinuedFractionEngine engine(frac_num, x.get_den());
  std::vector<std::int64_t> digits;
  engine.run(digits, n);
  return digits_orbit(std::move(digits), 0);
}

OrbitDigits gauss_digits(const QuadraticIrrational& x, std::size_t n) {
  if (n < 1) throw Error(Errc::invalid_argument, "gauss_digits needs N >= 1");
  if (x.q == 0 || x.r == 0 || x.d <= 0) {
    throw Error(Errc::invalid_argument, "quadratic irrational needs q != 0, r != 0, d > 0");
  }
  // Rewrite as (P + sqrt(D)) / Q with Q | D - P^2.
  mpz_class p = x.p, r = x.r, q = x.q;
  if (r < 0) {
    p = -p;
    r = -r;
    q = -q;
  }
  const mpz_class abs_q = abs(q);
  mpz_class big_d = r * r * x.d * abs_q * abs_q;
  mpz_class big_p = p * abs_q;
  mpz_class big_q = q * abs_q;
  mpz_class root;
  mpz_sqrt(root.get_mpz_t(), big_d.get_mpz_t());
  if (root * root == big_d) throw Error(Errc::invalid_argument, "d must not be a perfect square");

  auto next_digit = [&]() {
    mpz_class a;
    if (big_q > 0) {
      mpz_fdiv_q(a.get_mpz_t(), mpz_class(big_p + root).get_mpz_t(), big_q.get_mpz_t());
    } else {
      mpz_class neg_q = -big_q;
      mpz_fdiv_q(a.get_mpz_t(), mpz_class(big_p + root).get_mpz_t(), neg_q.get_mpz_t());
      a = -a - 1;
    }
    big_p = a * big_q - big_p;
    big_q = (big_d - big_p * big_p) / big_q;
    return a;
  };

  next_digit();  // a_0
  std::vector<std::int64_t> digits;
  digits.reserve(n);
  while (digits.size() < n) {
    const mpz_class a = next_digit();
    if (!a.fits_slong_p()) throw Error(Errc::digit_overflow, "digit exceeds 64 bits");
    digits.push_back(a.get_si());
  }
  return digits_orbit(std::move(digits), 0);
}

mpq_class convergent(std::span<const std::int64_t> digits, const mpz_class& integer_part) {
  // h_k / k_k with h_{-1} = 1, h_{-2} = 0, k_{-1} = 0, k_{-2} = 1.
  mpz_class h_prev = 1, h = integer_part;
  mpz_class k_prev = 0, k = 1;
  for (const std::int64_t a : digits) {
    mpz_class h_next = mpz_class(a) * h + h_prev;
    mpz_class k_next = mpz_class(a) * k + k_prev;
    h_prev = std::move(h);
    k_prev = std::move(k);
    h = std::move(h_next);
    k = std::move(k_next);
  }
  mpq_class out(h, k);
  out.canonicalize();
  return out;
}

}  // namespace trimlab
