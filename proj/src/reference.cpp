#include "covkl/reference.hpp"

#include "covkl/error.hpp"
#include "covkl/nn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace covkl::reference {

std::vector<double> sorted_sq_distances(const PointMatrix& points, std::span<const double> query) {
  const auto d = static_cast<std::size_t>(points.cols());
  if (query.size() != d) throw ConfigError("query dimension does not match the point set");
  std::vector<double> out(static_cast<std::size_t>(points.rows()));
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = squared_distance(query.data(), points.data() + i * d, d);
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

// Drops one zero distance from the front when requested.
std::span<const double> eligible(const std::vector<double>& sorted, bool exclude_exact_match) {
  std::span<const double> all(sorted);
  if (exclude_exact_match && !all.empty() && all.front() == 0.0) return all.subspan(1);
  return all;
}

std::size_t count_le(std::span<const double> sorted, double r2) {
  return static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), r2) -
                                  sorted.begin());
}

std::span<const double> row(const PointMatrix& m, std::size_t i) {
  return {m.data() + i * static_cast<std::size_t>(m.cols()), static_cast<std::size_t>(m.cols())};
}

} // namespace

double knn_distance(const PointMatrix& points, std::span<const double> query, std::size_t k,
                    bool exclude_exact_match) {
  const auto all = sorted_sq_distances(points, query);
  const auto e = eligible(all, exclude_exact_match);
  if (k < 1 || k > e.size()) throw ConfigError("neighbour rank out of range");
  return std::sqrt(e[k - 1]);
}

std::size_t count_within_radius(const PointMatrix& points, std::span<const double> query, double r,
                                bool exclude_exact_match) {
  const auto all = sorted_sq_distances(points, query);
  const auto e = eligible(all, exclude_exact_match);
  return static_cast<std::size_t>(
      std::count_if(e.begin(), e.end(), [r](double d2) { return std::sqrt(d2) <= r; }));
}

NeighborStats neighbor_stats(const PointMatrix& x, const PointMatrix& y) {
  check_distinct_samples(x, y);
  const auto n = static_cast<std::size_t>(x.rows());
  if (n < 2 || y.rows() < 1) throw ConfigError("need n >= 2 and m >= 1");
  NeighborStats s;
  for (std::size_t i = 0; i < n; ++i) {
    const auto dx_all = sorted_sq_distances(x, row(x, i));
    const auto dx = eligible(dx_all, true);
    const auto dy = sorted_sq_distances(y, row(x, i));
    const double eps2 = std::max(dx.front(), dy.front());
    const std::size_t k = count_le(dx, eps2);
    const std::size_t l = count_le(dy, eps2);
    s.rho_first.push_back(std::sqrt(dx.front()));
    s.nu_first.push_back(std::sqrt(dy.front()));
    s.eps.push_back(std::sqrt(eps2));
    s.k.push_back(k);
    s.l.push_back(l);
    s.rho_k.push_back(std::sqrt(dx[k - 1]));
    s.nu_l.push_back(std::sqrt(dy[l - 1]));
  }
  return s;
}

KlEstimate kld_est_bc(const PointMatrix& x, const PointMatrix& y) {
  const auto s = neighbor_stats(x, y);
  const auto n = static_cast<std::size_t>(x.rows());
  double sum_log = 0.0;
  double sum_psi = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::min(s.k[i], s.l[i]) != 1) throw EstimationError("tied neighbour distances");
    sum_log += std::log(s.nu_l[i] / s.rho_k[i]);
    sum_psi += digamma(static_cast<double>(s.k[i])) - digamma(static_cast<double>(s.l[i]));
  }
  const double nd = static_cast<double>(n);
  KlEstimate est;
  est.n = n;
  est.m = static_cast<std::size_t>(y.rows());
  est.d = static_cast<std::size_t>(x.cols());
  est.value = static_cast<double>(est.d) / nd * sum_log +
              std::log(static_cast<double>(est.m) / (nd - 1.0)) + sum_psi / nd;
  return est;
}

KlEstimate kld_est_nn(const PointMatrix& x, const PointMatrix& y, std::size_t k) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto m = static_cast<std::size_t>(y.rows());
  if (k < 1 || n <= k || m < k) throw ConfigError("k out of range");
  double sum_log = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double rho = knn_distance(x, row(x, i), k, true);
    const double nu = knn_distance(y, row(x, i), k, false);
    if (rho == 0.0 || nu == 0.0) throw DuplicatePointsError("zero neighbour distance", "x", i, i);
    sum_log += std::log(nu / rho);
  }
  const double nd = static_cast<double>(n);
  KlEstimate est;
  est.n = n;
  est.m = m;
  est.d = static_cast<std::size_t>(x.cols());
  est.value = static_cast<double>(est.d) / nd * sum_log + std::log(static_cast<double>(m) / (nd - 1.0));
  return est;
}

} // namespace covkl::reference
