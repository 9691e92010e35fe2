#include "covkl/stats.hpp"

#include "covkl/error.hpp"

#include <algorithm>
#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <numbers>

namespace covkl::stats {

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw ConfigError("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("quantile probability outside [0, 1]");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double quantile(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, p);
}

double iqr_sorted(std::span<const double> sorted) {
  return quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
}

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) throw ConfigError("normal quantile requires u in (0, 1)");
  // erfc_inv keeps full relative precision in the lower tail.
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
}

} // namespace covkl::stats
