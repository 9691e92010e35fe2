#pragma once

#include "covkl/data.hpp"
#include "covkl/types.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace covkl {

/// Any estimator of a functional of (p, q) from samples x ~ p and y ~ q.
using Estimator = std::function<double(const Dataset& x, const Dataset& y)>;

/// kld_est_mixed as an Estimator.
Estimator mixed_kl_estimator();

struct SubsamplingConfig {
  std::size_t replicates = 1000;   ///< s
  double b_exponent = 2.0 / 3.0;   ///< subsample size b = ceil(n^b_exponent)
  double rate_exponent = 0.5;      ///< tau_n = n^rate_exponent
  double alpha = 0.05;
  std::uint64_t seed = 0;
  double max_failure_fraction = 0.10;

  void validate() const;
};

/// Recorded values tau_b * (theta*_b - theta_hat), in replicate order, over
/// the replicates that succeeded.
struct SubsampleDistribution {
  std::vector<double> values;
  std::size_t b_x = 0;
  std::size_t b_y = 0;
  std::size_t failures = 0;
};

/// Draws `replicates` subsample pairs without replacement (sizes b_x from x,
/// b_y from y) and records tau_b * (theta*_b - theta_hat) with
/// tau_b = b_x^rate_exponent. Replicate r uses an RNG stream derived from
/// (seed, r), so serial and parallel runs agree.
SubsampleDistribution subsample_distribution(const Dataset& x, const Dataset& y,
                                             const Estimator& estimator, double theta_hat,
                                             std::size_t b_x, std::size_t b_y,
                                             std::size_t replicates, double rate_exponent,
                                             std::uint64_t seed);

/// Point estimate plus the (1 - alpha) subsampling confidence interval
///   [theta_hat - q_{1-alpha/2} / tau_n, theta_hat - q_{alpha/2} / tau_n].
/// Throws SubsamplingError when more than max_failure_fraction of the
/// replicates fail.
KlEstimate subsample_ci(const Dataset& x, const Dataset& y, const Estimator& estimator,
                        const SubsamplingConfig& cfg);

/// Empirical convergence-rate exponent beta such that the spread of
/// theta*_b - theta_hat decays like b^-beta: the negated least-squares slope
/// of log IQR against log b. y subsamples scale as ceil(b * m / n).
double estimate_convergence_rate(const Dataset& x, const Dataset& y, const Estimator& estimator,
                                 const std::vector<std::size_t>& b_grid, std::size_t replicates,
                                 std::uint64_t seed);

} // namespace covkl
