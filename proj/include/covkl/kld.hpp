#pragma once

#include "covkl/types.hpp"

#include <Eigen/Core>
#include <cstddef>
#include <vector>

namespace covkl {

/// psi(x) = d/dx log Gamma(x) for x > 0, via upward recurrence and the
/// asymptotic series. Accurate to ~1e-14 relative for x >= 1.
double digamma(double x);

/// Per-point neighbour quantities of the bias-corrected estimator.
///   eps[i] = max(rho_first[i], nu_first[i])
///   k[i], l[i] = numbers of x (self excluded) / y points within the closed ball of radius eps[i]
///   rho_k[i], nu_l[i] = the k[i]-th / l[i]-th neighbour distances (both <= eps[i])
struct NeighborStats {
  std::vector<double> rho_first;
  std::vector<double> nu_first;
  std::vector<double> eps;
  std::vector<std::size_t> k;
  std::vector<std::size_t> l;
  std::vector<double> rho_k;
  std::vector<double> nu_l;
};

/// Checks the samples the nearest-neighbour estimators require: matching
/// dimensions, no duplicate rows within x or y, no row shared between them.
/// Throws DuplicatePointsError naming the offending indices.
void check_distinct_samples(const PointMatrix& x, const PointMatrix& y);

/// Neighbour statistics for every row of x (OpenMP over rows).
NeighborStats neighbor_stats(const PointMatrix& x, const PointMatrix& y);

/// Bias-corrected two-sample nearest-neighbour KL estimator D(p || q) from
/// x ~ p (n x d) and y ~ q (m x d), in nats:
///   (d/n) sum_i log(nu_{l_i}(i) / rho_{k_i}(i)) + log(m/(n-1)) + (1/n) sum_i (psi(k_i) - psi(l_i))
/// With counts k_i, l_i the density ratio estimate is log(k/l) + ..., so the
/// digamma terms enter as psi(k_i) - psi(l_i).
/// Requires n >= 2, m >= 1 and pairwise distinct points across both samples.
KlEstimate kld_est_bc(const PointMatrix& x, const PointMatrix& y);

/// Fixed-k nearest-neighbour estimator without bias correction:
///   (d/n) sum_i log(nu_k(i) / rho_k(i)) + log(m/(n-1))
KlEstimate kld_est_nn(const PointMatrix& x, const PointMatrix& y, std::size_t k = 1);

/// Closed-form KL divergence between N(mu1, s1) and N(mu2, s2).
double kld_gaussian_analytic(const Eigen::VectorXd& mu1, const Eigen::MatrixXd& s1,
                             const Eigen::VectorXd& mu2, const Eigen::MatrixXd& s2);

} // namespace covkl
