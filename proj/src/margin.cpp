#include "covkl/error.hpp"
#include "covkl/models.hpp"
#include "covkl/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

namespace covkl {
namespace {

// Kernels further than this many bandwidths away contribute < 1.2e-19.
constexpr double kWindow = 9.0;
constexpr std::size_t kMaxKnots = 256;

} // namespace

double silverman_bandwidth(std::span<const double> sorted) {
  const double sd = stats::sample_sd(sorted);
  const double iqr = stats::iqr_sorted(sorted);
  const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  const double h = 0.9 * spread * std::pow(static_cast<double>(sorted.size()), -0.2);
  return std::max(h, 1e-8 * (sorted.back() - sorted.front()));
}

MarginModel MarginModel::fit(std::span<const double> values, std::span<const bool> missing) {
  if (!missing.empty() && missing.size() != values.size())
    throw ConfigError("missing mask length does not match the values");
  std::vector<double> kept;
  kept.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!missing.empty() && missing[i]) continue;
    if (!std::isfinite(values[i])) throw ConfigError("margin values must be finite");
    kept.push_back(values[i]);
  }
  if (kept.size() < 5)
    throw FitError("margin fit needs at least 5 observed values, got " +
                   std::to_string(kept.size()));
  std::sort(kept.begin(), kept.end());
  if (kept.front() == kept.back()) throw FitError("margin fit needs values with non-zero spread");
  const double h = silverman_bandwidth(kept);
  return MarginModel(std::move(kept), h);
}

MarginModel::MarginModel(std::vector<double> values, double bandwidth)
    : values_(std::move(values)), h_(bandwidth) {
  if (values_.empty()) throw ConfigError("margin needs at least one training value");
  if (!(h_ > 0.0) || !std::isfinite(h_)) throw ConfigError("margin bandwidth must be positive");
  std::sort(values_.begin(), values_.end());
  const double n = static_cast<double>(values_.size());
  u_min_ = 1.0 / (2.0 * n);
  u_max_ = 1.0 - 1.0 / (2.0 * n);
  const std::size_t knots = std::min(values_.size(), kMaxKnots);
  knot_x_.resize(knots);
  knot_cdf_.resize(knots);
  knot_pdf_.resize(knots);
  for (std::size_t k = 0; k < knots; ++k) {
    knot_x_[k] = values_[knots == 1 ? 0 : k * (values_.size() - 1) / (knots - 1)];
    std::tie(knot_cdf_[k], knot_pdf_[k]) = cdf_density(knot_x_[k]);
  }
}

std::pair<double, double> MarginModel::cdf_density(double t) const {
  const auto lo = std::lower_bound(values_.begin(), values_.end(), t - kWindow * h_);
  const auto hi = std::upper_bound(lo, values_.end(), t + kWindow * h_);
  auto first = lo;
  auto last = hi;
  if (lo == hi && lo == values_.begin()) last = values_.end(); // far lower tail: keep every term
  const double below = static_cast<double>(first - values_.begin());
  double sum = 0.0;
  double dens = 0.0;
  for (auto it = first; it != last; ++it) {
    const double z = (t - *it) / h_;
    sum += stats::normal_cdf(z);
    dens += std::exp(-0.5 * z * z);
  }
  const double n = static_cast<double>(values_.size());
  return {(below + sum) / n, dens / (n * h_ * std::sqrt(2.0 * std::numbers::pi))};
}

double MarginModel::cdf(double t) const { return cdf_density(t).first; }
double MarginModel::density(double t) const { return cdf_density(t).second; }

double MarginModel::clamp(double u) const { return std::clamp(u, u_min_, u_max_); }

namespace {

// Root in [0, 1] of the cubic Hermite interpolant through (0, F0), (1, F1)
// with slopes L*f0, L*f1, mapped back to [lo, lo + L].
double hermite_guess(double u, double lo, double L, double F0, double F1, double f0, double f1) {
  const double s0 = L * f0;
  const double s1 = L * f1;
  double a = 0.0;
  double b = 1.0;
  double t = F1 > F0 ? std::clamp((u - F0) / (F1 - F0), 0.0, 1.0) : 0.5;
  for (int iter = 0; iter < 30; ++iter) {
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double H = (2 * t3 - 3 * t2 + 1) * F0 + (t3 - 2 * t2 + t) * s0 + (-2 * t3 + 3 * t2) * F1 +
                     (t3 - t2) * s1;
    const double dH = (6 * t2 - 6 * t) * F0 + (3 * t2 - 4 * t + 1) * s0 + (-6 * t2 + 6 * t) * F1 +
                      (3 * t2 - 2 * t) * s1;
    const double g = H - u;
    if (g < 0.0)
      a = t;
    else
      b = t;
    double next = dH > 0.0 ? t - g / dH : 0.5 * (a + b);
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    if (std::abs(next - t) < 1e-14) return lo + L * next;
    t = next;
  }
  return lo + L * t;
}

} // namespace

double MarginModel::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw ConfigError("margin quantile requires u in (0, 1)");
  const std::size_t knots = knot_cdf_.size();
  double lo;
  double hi;
  double F_lo;
  double F_hi;
  double f_lo;
  double f_hi;
  if (u < knot_cdf_.front()) {
    hi = knot_x_.front();
    F_hi = knot_cdf_.front();
    f_hi = knot_pdf_.front();
    double step = h_;
    for (;;) {
      lo = hi - step;
      std::tie(F_lo, f_lo) = cdf_density(lo);
      if (F_lo <= u) break;
      step *= 2.0;
    }
  } else if (u > knot_cdf_.back()) {
    lo = knot_x_.back();
    F_lo = knot_cdf_.back();
    f_lo = knot_pdf_.back();
    double step = h_;
    for (;;) {
      hi = lo + step;
      std::tie(F_hi, f_hi) = cdf_density(hi);
      if (F_hi >= u) break;
      if (step > 1e6 * (range() + h_)) break; // F has saturated at 1 in double precision
      step *= 2.0;
    }
  } else {
    const auto it = std::upper_bound(knot_cdf_.begin(), knot_cdf_.end(), u);
    const std::size_t k = static_cast<std::size_t>(it - knot_cdf_.begin());
    if (k >= knots) return knot_x_.back();
    lo = knot_x_[k - 1];
    hi = knot_x_[k];
    F_lo = knot_cdf_[k - 1];
    F_hi = knot_cdf_[k];
    f_lo = knot_pdf_[k - 1];
    f_hi = knot_pdf_[k];
  }

  const double tol = 1e-9 * std::max(range(), h_);
  double x = hermite_guess(u, lo, hi - lo, F_lo, F_hi, f_lo, f_hi);
  for (int iter = 0; iter < 300; ++iter) {
    const auto [f_val, dens] = cdf_density(x);
    const double g = f_val - u;
    if (g == 0.0) return x;
    if (g < 0.0)
      lo = x;
    else
      hi = x;
    double next = dens > 0.0 ? x - g / dens : lo - 1.0;
    if (!(next >= lo && next <= hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= tol) return next;
    if (hi - lo <= 1e-15 * std::max({std::abs(lo), std::abs(hi), tol})) return next;
    x = next;
  }
  return x;
}

MarginModel fit_margin(std::span<const double> values, std::span<const bool> missing) {
  return MarginModel::fit(values, missing);
}

double margin_quantile(const MarginModel& margin, double u) { return margin.quantile(u); }

std::vector<MarginModel> fit_margins(const Dataset& ds) {
  const Schema& schema = ds.schema();
  std::vector<MarginModel> margins;
  for (std::size_t c = 0; c < schema.n_continuous(); ++c) {
    const std::size_t j = schema.continuous_column(c);
    std::vector<double> kept;
    for (std::size_t i = 0; i < ds.n_rows(); ++i)
      if (!ds.is_missing(i, j)) kept.push_back(ds.continuous()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)));
    try {
      margins.push_back(MarginModel::fit(kept));
    } catch (const FitError& e) {
      throw FitError("column '" + schema[j].name + "': " + e.what());
    }
  }
  return margins;
}

PointMatrix to_uniform(const Dataset& ds, const std::vector<MarginModel>& margins) {
  const Schema& schema = ds.schema();
  if (margins.size() != schema.n_continuous())
    throw ConfigError("expected " + std::to_string(schema.n_continuous()) + " margins, got " +
                      std::to_string(margins.size()));
  PointMatrix u(ds.continuous().rows(), ds.continuous().cols());
  for (std::size_t c = 0; c < margins.size(); ++c) {
    const std::size_t j = schema.continuous_column(c);
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto cc = static_cast<Eigen::Index>(c);
      u(ii, cc) = ds.is_missing(i, j) ? std::nan("") : margins[c].to_uniform(ds.continuous()(ii, cc));
    }
  }
  return u;
}

} // namespace covkl
