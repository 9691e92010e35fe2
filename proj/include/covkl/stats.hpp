#pragma once

#include <span>
#include <vector>

namespace covkl::stats {

/// Empirical quantile with linear interpolation between order statistics
/// (position (n-1)*p). This is the one quantile convention used project-wide.
/// `sorted` must be ascending and non-empty; 0 <= p <= 1.
double quantile_sorted(std::span<const double> sorted, double p);
double quantile(std::vector<double> values, double p);
double iqr_sorted(std::span<const double> sorted);

double mean(std::span<const double> v);
/// Sample standard deviation (denominator n-1).
double sample_sd(std::span<const double> v);

double normal_cdf(double z);
double normal_pdf(double z);
/// Inverse of normal_cdf; u in (0, 1).
double normal_quantile(double u);

} // namespace covkl::stats
