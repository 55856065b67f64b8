#pragma once

#include <span>
#include <utility>
#include <vector>

namespace trimlab {

/// Linear-interpolation quantile (the "type 7" rule) of unsorted data.
double quantile(std::span<const double> data, double q);
double median(std::span<const double> data);
double interquartile_range(std::span<const double> data);

struct ExponentFit {
  double slope = 0.0;
  double std_error = 0.0;
  double intercept = 0.0;
};

/// Least-squares slope of ln(magnitude) against ln(N).
ExponentFit fit_exponent(std::span<const std::pair<double, double>> pairs);

}  // namespace trimlab
