#include <doctest.h>

#include <cmath>
#include <vector>

#include "trimlab/error.hpp"
#include "trimlab/stats.hpp"

using namespace trimlab;

TEST_CASE("quantiles interpolate between order statistics") {
  const std::vector<double> data{7, 1, 3, 2, 10, 4, 9, 5, 6, 8};
  CHECK(quantile(data, 0.25) == doctest::Approx(3.25));
  CHECK(quantile(data, 0.0) == 1);
  CHECK(quantile(data, 1.0) == 10);
  CHECK(median(data) == doctest::Approx(5.5));
  CHECK(interquartile_range(data) == doctest::Approx(4.5));
  CHECK(median(std::vector<double>{2}) == 2);
  CHECK_THROWS_AS(median(std::vector<double>{}), Error);
  CHECK_THROWS_AS(quantile(data, 1.5), Error);
}

TEST_CASE("exponent fits") {
  std::vector<std::pair<double, double>> power, flat, noisy;
  for (double n : {1e3, 1e4, 1e5, 1e6}) {
    power.emplace_back(n, std::pow(n, 2.0 / 3.0));
    flat.emplace_back(n, 4.2);
  }
  const ExponentFit exact = fit_exponent(power);
  CHECK(std::abs(exact.slope - 2.0 / 3.0) < 1e-12);
  CHECK(exact.std_error < 1e-10);
  CHECK(std::abs(fit_exponent(flat).slope) < 1e-12);
  noisy = {{10, 3}, {100, 40}, {1000, 250}, {10000, 4000}};
  const ExponentFit rough = fit_exponent(noisy);
  CHECK(rough.std_error > 0);
  CHECK(rough.slope == doctest::Approx(1.0).epsilon(0.2));
  CHECK_THROWS_AS(fit_exponent(std::vector<std::pair<double, double>>{{1, 1}, {2, 2}}), Error);
  CHECK_THROWS_AS(fit_exponent(std::vector<std::pair<double, double>>{{1, 1}, {2, 0}, {3, 1}}), Error);
  try {
    fit_exponent(std::vector<std::pair<double, double>>{{5, 1}, {5, 2}, {5, 3}});
    FAIL("expected a degenerate fit");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::degenerate);
  }
}
