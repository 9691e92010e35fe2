#include "covkl/uq.hpp"

#include "covkl/error.hpp"
#include "covkl/mixed.hpp"
#include "covkl/rng.hpp"
#include "covkl/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

namespace covkl {

Estimator mixed_kl_estimator() {
  return [](const Dataset& x, const Dataset& y) { return kld_est_mixed(x, y).value; };
}

void SubsamplingConfig::validate() const {
  if (!(b_exponent > 0.0 && b_exponent < 1.0))
    throw ConfigError("subsample exponent must lie in (0, 1)");
  if (replicates < 2) throw ConfigError("need at least 2 subsampling replicates");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (!(rate_exponent > 0.0)) throw ConfigError("rate exponent must be positive");
  if (!(max_failure_fraction >= 0.0 && max_failure_fraction <= 1.0))
    throw ConfigError("failure threshold must lie in [0, 1]");
}

namespace {

// First `b` entries of a partial Fisher-Yates shuffle of 0..n-1, sorted.
std::vector<std::size_t> draw_without_replacement(std::size_t n, std::size_t b, rng::Engine& eng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t t = 0; t < b; ++t) {
    std::uniform_int_distribution<std::size_t> pick(t, n - 1);
    std::swap(idx[t], idx[pick(eng)]);
  }
  idx.resize(b);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::size_t subsample_size(std::size_t n, double exponent) {
  return static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(n), exponent) - 1e-9));
}

} // namespace

SubsampleDistribution subsample_distribution(const Dataset& x, const Dataset& y,
                                             const Estimator& estimator, double theta_hat,
                                             std::size_t b_x, std::size_t b_y,
                                             std::size_t replicates, double rate_exponent,
                                             std::uint64_t seed) {
  if (b_x < 2) throw ConfigError("subsample size for x must be at least 2");
  if (b_x > x.n_rows() || b_y > y.n_rows() || b_y < 1)
    throw ConfigError("subsample sizes exceed the sample sizes");
  const double tau_b = std::pow(static_cast<double>(b_x), rate_exponent);
  std::vector<std::optional<double>> slots(replicates);
  const auto count = static_cast<std::ptrdiff_t>(replicates);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t r = 0; r < count; ++r) {
    rng::Engine eng(rng::derive(seed, {static_cast<std::uint64_t>(r)}));
    const auto rows_x = draw_without_replacement(x.n_rows(), b_x, eng);
    const auto rows_y = draw_without_replacement(y.n_rows(), b_y, eng);
    try {
      const double theta = estimator(x.take_rows(rows_x), y.take_rows(rows_y));
      if (std::isfinite(theta)) slots[static_cast<std::size_t>(r)] = tau_b * (theta - theta_hat);
    } catch (const Error&) {
      // counted below
    }
  }
  SubsampleDistribution dist;
  dist.b_x = b_x;
  dist.b_y = b_y;
  for (const auto& v : slots) {
    if (v)
      dist.values.push_back(*v);
    else
      ++dist.failures;
  }
  return dist;
}

KlEstimate subsample_ci(const Dataset& x, const Dataset& y, const Estimator& estimator,
                        const SubsamplingConfig& cfg) {
  cfg.validate();
  const double theta_hat = estimator(x, y);
  const std::size_t b_x = subsample_size(x.n_rows(), cfg.b_exponent);
  const std::size_t b_y = subsample_size(y.n_rows(), cfg.b_exponent);
  if (b_x < 2) throw ConfigError("subsample size for x is below 2; sample too small");
  auto dist = subsample_distribution(x, y, estimator, theta_hat, b_x, b_y, cfg.replicates,
                                     cfg.rate_exponent, cfg.seed);
  const double allowed = cfg.max_failure_fraction * static_cast<double>(cfg.replicates);
  if (static_cast<double>(dist.failures) > allowed || dist.values.empty())
    throw SubsamplingError(std::to_string(dist.failures) + " of " +
                               std::to_string(cfg.replicates) + " subsampling replicates failed",
                           dist.failures, cfg.replicates);
  std::sort(dist.values.begin(), dist.values.end());
  const double tau_n = std::pow(static_cast<double>(x.n_rows()), cfg.rate_exponent);
  const double q_lo = stats::quantile_sorted(dist.values, cfg.alpha / 2.0);
  const double q_hi = stats::quantile_sorted(dist.values, 1.0 - cfg.alpha / 2.0);

  KlEstimate est;
  est.value = theta_hat;
  est.n = x.n_rows();
  est.m = y.n_rows();
  est.d = x.schema().n_continuous();
  est.ci = ConfidenceInterval{theta_hat - q_hi / tau_n, theta_hat - q_lo / tau_n};
  est.level = 1.0 - cfg.alpha;
  est.failures = dist.failures;
  return est;
}

double estimate_convergence_rate(const Dataset& x, const Dataset& y, const Estimator& estimator,
                                 const std::vector<std::size_t>& b_grid, std::size_t replicates,
                                 std::uint64_t seed) {
  if (b_grid.size() < 3) throw ConfigError("convergence-rate estimation needs >= 3 grid sizes");
  for (std::size_t t = 0; t < b_grid.size(); ++t) {
    if (b_grid[t] < 2) throw ConfigError("grid sizes must be at least 2");
    if (t && b_grid[t] <= b_grid[t - 1]) throw ConfigError("grid sizes must increase strictly");
  }
  if (b_grid.back() > x.n_rows()) throw ConfigError("largest grid size exceeds n");
  if (replicates < 4) throw ConfigError("need at least 4 replicates per grid size");

  const double theta_hat = estimator(x, y);
  const double ratio = static_cast<double>(y.n_rows()) / static_cast<double>(x.n_rows());
  std::vector<double> log_b;
  std::vector<double> log_spread;
  for (std::size_t t = 0; t < b_grid.size(); ++t) {
    const std::size_t b = b_grid[t];
    const std::size_t b_y = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::ceil(static_cast<double>(b) * ratio - 1e-9)), 1, y.n_rows());
    auto dist = subsample_distribution(x, y, estimator, theta_hat, b, b_y, replicates, 0.0,
                                       rng::derive(seed, {static_cast<std::uint64_t>(b)}));
    if (dist.values.size() < replicates / 2)
      throw SubsamplingError("too many failed replicates at b=" + std::to_string(b),
                             dist.failures, replicates);
    std::sort(dist.values.begin(), dist.values.end());
    const double spread = stats::iqr_sorted(dist.values);
    if (!(spread > 0.0))
      throw EstimationError("zero spread of the subsample distribution at b=" + std::to_string(b));
    log_b.push_back(std::log(static_cast<double>(b)));
    log_spread.push_back(std::log(spread));
  }
  const double mx = stats::mean(log_b);
  const double my = stats::mean(log_spread);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t t = 0; t < log_b.size(); ++t) {
    sxy += (log_b[t] - mx) * (log_spread[t] - my);
    sxx += (log_b[t] - mx) * (log_b[t] - mx);
  }
  return -sxy / sxx;
}

} // namespace covkl
