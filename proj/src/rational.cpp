#include "trimlab/rational.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "trimlab/error.hpp"

namespace trimlab {

namespace {

std::string_view trim_spaces(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

mpz_class parse_integer(std::string_view text) {
  text = trim_spaces(text);
  std::string digits(text);
  if (!digits.empty() && digits.front() == '+') digits.erase(0, 1);
  mpz_class z;
  if (digits.empty() || z.set_str(digits, 10) != 0) {
    throw Error(Errc::invalid_argument, "not an integer: '" + std::string(text) + "'");
  }
  return z;
}

// ln of a positive integer; mpz_get_d_2exp keeps the exponent separate so
// numbers far beyond double range are fine.
double log_integer(const mpz_class& z) {
  long exponent = 0;
  const double mantissa = mpz_get_d_2exp(&exponent, z.get_mpz_t());
  return std::log(mantissa) + static_cast<double>(exponent) * std::log(2.0);
}

}  // namespace

mpq_class parse_rational(std::string_view text) {
  text = trim_spaces(text);
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const mpz_class num = parse_integer(text.substr(0, slash));
    const mpz_class den = parse_integer(text.substr(slash + 1));
    if (den == 0) throw Error(Errc::invalid_argument, "zero denominator in '" + std::string(text) + "'");
    mpq_class q(num, den);
    q.canonicalize();
    return q;
  }
  if (const auto dot = text.find('.'); dot != std::string_view::npos) {
    const std::string_view whole = text.substr(0, dot);
    const std::string_view frac = text.substr(dot + 1);
    const bool negative = !whole.empty() && whole.front() == '-';
    mpz_class scale = 1;
    for (std::size_t k = 0; k < frac.size(); ++k) scale *= 10;
    const mpz_class w = (whole.empty() || whole == "-" || whole == "+") ? mpz_class(0) : parse_integer(whole);
    const mpz_class f = frac.empty() ? mpz_class(0) : parse_integer(frac);
    if (f < 0) throw Error(Errc::invalid_argument, "malformed decimal '" + std::string(text) + "'");
    mpz_class num = abs(w) * scale + f;
    if (negative) num = -num;
    mpq_class q(num, scale);
    q.canonicalize();
    return q;
  }
  return mpq_class(parse_integer(text));
}

std::string to_string(const mpq_class& q) {
  return q.get_str(10);
}

double log_rational(const mpq_class& q) {
  if (sgn(q) <= 0) throw Error(Errc::invalid_argument, "log of a non-positive rational");
  return log_integer(q.get_num()) - log_integer(q.get_den());
}

double log1p_rational(const mpq_class& q) {
  if (q <= -1) throw Error(Errc::invalid_argument, "log1p argument <= -1");
  const double approx = q.get_d();
  if (std::abs(approx) < 0.5) return std::log1p(approx);
  return log_rational(mpq_class(q + 1));
}

QuadraticIrrational parse_quadratic(std::string_view text) {
  std::int64_t parts[4] = {0, 0, 0, 0};
  std::size_t count = 0;
  while (count < 4) {
    const auto comma = text.find(',');
    const std::string_view field = trim_spaces(text.substr(0, comma));
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), parts[count]);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
      throw Error(Errc::invalid_argument, "malformed quadratic irrational field '" + std::string(field) + "'");
    }
    ++count;
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  if (count != 4) throw Error(Errc::invalid_argument, "quadratic irrational needs p,r,d,q");
  return QuadraticIrrational{parts[0], parts[1], parts[2], parts[3]};
}

}  // namespace trimlab
