#include "trimlab/stats.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "trimlab/error.hpp"

namespace trimlab {

double quantile(std::span<const double> data, double q) {
  if (data.empty()) throw Error(Errc::invalid_argument, "quantile of empty data");
  if (!(q >= 0 && q <= 1)) throw Error(Errc::invalid_argument, "quantile level must be in [0, 1]");
  std::vector<double> sorted(data.begin(), data.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double median(std::span<const double> data) { return quantile(data, 0.5); }

double interquartile_range(std::span<const double> data) {
  return quantile(data, 0.75) - quantile(data, 0.25);
}

ExponentFit fit_exponent(std::span<const std::pair<double, double>> pairs) {
  if (pairs.size() < 3) throw Error(Errc::invalid_argument, "exponent fit needs at least 3 points");
  const auto rows = static_cast<Eigen::Index>(pairs.size());
  Eigen::MatrixXd design(rows, 2);
  Eigen::VectorXd response(rows);
  for (Eigen::Index k = 0; k < rows; ++k) {
    const auto [n, magnitude] = pairs[static_cast<std::size_t>(k)];
    if (!(n > 0) || !(magnitude > 0)) {
      throw Error(Errc::invalid_argument, "exponent fit needs N > 0 and magnitudes > 0");
    }
    design(k, 0) = 1.0;
    design(k, 1) = std::log(n);
    response(k) = std::log(magnitude);
  }
  const Eigen::VectorXd x = design.col(1);
  if ((x.array() - x.mean()).abs().maxCoeff() == 0.0) {
    throw Error(Errc::degenerate, "all N are equal");
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  const Eigen::Vector2d beta = qr.solve(response);
  const Eigen::VectorXd residual = response - design * beta;
  const double sigma2 = residual.squaredNorm() / static_cast<double>(rows - 2);
  const Eigen::Matrix2d covariance = (design.transpose() * design).inverse() * sigma2;
  return {beta(1), std::sqrt(std::max(0.0, covariance(1, 1))), beta(0)};
}

}  // namespace trimlab
