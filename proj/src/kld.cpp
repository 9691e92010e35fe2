#include "covkl/kld.hpp"

#include "covkl/error.hpp"
#include "covkl/nn.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <string>

namespace covkl {
namespace {

std::span<const double> row_span(const PointMatrix& m, std::size_t i) {
  return {m.data() + i * static_cast<std::size_t>(m.cols()), static_cast<std::size_t>(m.cols())};
}

void check_shapes(const PointMatrix& x, const PointMatrix& y) {
  if (x.cols() < 1) throw ConfigError("samples need at least one continuous dimension");
  if (x.cols() != y.cols())
    throw ConfigError("samples have different dimensions (" + std::to_string(x.cols()) + " vs " +
                      std::to_string(y.cols()) + ")");
  if (!x.allFinite() || !y.allFinite()) throw ConfigError("samples contain non-finite values");
}

void check_distinct(const PointMatrix& x, const PointMatrix& y, bool check_y) {
  if (auto dup = find_duplicate_points(x))
    throw DuplicatePointsError("duplicate points in x: rows " + std::to_string(dup->first) +
                                   " and " + std::to_string(dup->second),
                               "x", dup->first, dup->second);
  if (check_y) {
    if (auto dup = find_duplicate_points(y))
      throw DuplicatePointsError("duplicate points in y: rows " + std::to_string(dup->first) +
                                     " and " + std::to_string(dup->second),
                                 "y", dup->first, dup->second);
  }
  if (auto shared = find_shared_point(x, y))
    throw DuplicatePointsError("x row " + std::to_string(shared->first) +
                                   " coincides with y row " + std::to_string(shared->second),
                               "x/y", shared->first, shared->second);
}

} // namespace

void check_distinct_samples(const PointMatrix& x, const PointMatrix& y) {
  check_shapes(x, y);
  check_distinct(x, y, true);
}

NeighborStats neighbor_stats(const PointMatrix& x, const PointMatrix& y) {
  check_distinct_samples(x, y);
  const auto n = static_cast<std::size_t>(x.rows());
  if (n < 2) throw ConfigError("the bias-corrected estimator needs n >= 2 points in x");
  if (y.rows() < 1) throw ConfigError("the bias-corrected estimator needs m >= 1 points in y");

  const NeighborIndex x_index(x);
  const NeighborIndex y_index(y);
  NeighborStats s;
  s.rho_first.resize(n);
  s.nu_first.resize(n);
  s.eps.resize(n);
  s.k.resize(n);
  s.l.resize(n);
  s.rho_k.resize(n);
  s.nu_l.resize(n);

  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t t = 0; t < count; ++t) {
    const auto i = static_cast<std::size_t>(t);
    const auto q = row_span(x, i);
    const double rho1 = x_index.knn(q, 1, true).sq_distance;
    const double nu1 = y_index.knn(q, 1, false).sq_distance;
    const double eps2 = std::max(rho1, nu1);
    const std::size_t k = x_index.count_within_sq_radius(q, eps2, true);
    const std::size_t l = y_index.count_within_sq_radius(q, eps2, false);
    s.rho_first[i] = std::sqrt(rho1);
    s.nu_first[i] = std::sqrt(nu1);
    s.eps[i] = std::sqrt(eps2);
    s.k[i] = k;
    s.l[i] = l;
    s.rho_k[i] = std::sqrt(k == 1 ? rho1 : x_index.knn(q, k, true).sq_distance);
    s.nu_l[i] = std::sqrt(l == 1 ? nu1 : y_index.knn(q, l, false).sq_distance);
  }
  return s;
}

KlEstimate kld_est_bc(const PointMatrix& x, const PointMatrix& y) {
  const NeighborStats s = neighbor_stats(x, y);
  const auto n = static_cast<std::size_t>(x.rows());
  const auto m = static_cast<std::size_t>(y.rows());
  const auto d = static_cast<std::size_t>(x.cols());
  double sum_log = 0.0;
  double sum_psi = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::min(s.k[i], s.l[i]) != 1)
      throw EstimationError("tied neighbour distances at x row " + std::to_string(i) +
                            ": both neighbour counts exceed 1 (k=" + std::to_string(s.k[i]) +
                            ", l=" + std::to_string(s.l[i]) + ")");
    sum_log += std::log(s.nu_l[i] / s.rho_k[i]);
    sum_psi += digamma(static_cast<double>(s.k[i])) - digamma(static_cast<double>(s.l[i]));
  }
  const double nd = static_cast<double>(n);
  KlEstimate est;
  est.value = static_cast<double>(d) / nd * sum_log +
              std::log(static_cast<double>(m) / (nd - 1.0)) + sum_psi / nd;
  est.n = n;
  est.m = m;
  est.d = d;
  return est;
}

KlEstimate kld_est_nn(const PointMatrix& x, const PointMatrix& y, std::size_t k) {
  check_shapes(x, y);
  const auto n = static_cast<std::size_t>(x.rows());
  const auto m = static_cast<std::size_t>(y.rows());
  const auto d = static_cast<std::size_t>(x.cols());
  if (k < 1 || n <= k || m < k)
    throw ConfigError("fixed-k estimator needs 1 <= k < n and k <= m (k=" + std::to_string(k) +
                      ", n=" + std::to_string(n) + ", m=" + std::to_string(m) + ")");
  check_distinct(x, y, false);

  const NeighborIndex x_index(x);
  const NeighborIndex y_index(y);
  std::vector<double> terms(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t t = 0; t < count; ++t) {
    const auto i = static_cast<std::size_t>(t);
    const auto q = row_span(x, i);
    const double rho = std::sqrt(x_index.knn(q, k, true).sq_distance);
    const double nu = std::sqrt(y_index.knn(q, k, false).sq_distance);
    terms[i] = std::log(nu / rho);
  }
  double sum_log = 0.0;
  for (double v : terms) sum_log += v;
  const double nd = static_cast<double>(n);
  KlEstimate est;
  est.value = static_cast<double>(d) / nd * sum_log + std::log(static_cast<double>(m) / (nd - 1.0));
  est.n = n;
  est.m = m;
  est.d = d;
  return est;
}

double kld_gaussian_analytic(const Eigen::VectorXd& mu1, const Eigen::MatrixXd& s1,
                             const Eigen::VectorXd& mu2, const Eigen::MatrixXd& s2) {
  const auto d = mu1.size();
  if (d < 1 || mu2.size() != d || s1.rows() != d || s1.cols() != d || s2.rows() != d ||
      s2.cols() != d)
    throw ConfigError("Gaussian parameters have inconsistent dimensions");
  auto check_pd = [](const Eigen::MatrixXd& s, const char* name) {
    const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
    if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw ConfigError(std::string(name) + " is not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success)
      throw ConfigError(std::string(name) + " is not positive definite");
    return llt;
  };
  const auto llt1 = check_pd(s1, "covariance 1");
  const auto llt2 = check_pd(s2, "covariance 2");
  const Eigen::VectorXd diff = mu2 - mu1;
  const double trace = llt2.solve(s1).trace();
  const double quad = diff.dot(llt2.solve(diff));
  const Eigen::MatrixXd l1 = llt1.matrixL();
  const Eigen::MatrixXd l2 = llt2.matrixL();
  const double logdet1 = 2.0 * l1.diagonal().array().log().sum();
  const double logdet2 = 2.0 * l2.diagonal().array().log().sum();
  return 0.5 * (trace + quad - static_cast<double>(d) + logdet2 - logdet1);
}

} // namespace covkl
