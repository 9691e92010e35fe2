#include "covkl/error.hpp"
#include "covkl/harness.hpp"
#include "covkl/rng.hpp"
#include "covkl/stats.hpp"

#include <Eigen/Cholesky>
#include <cmath>

namespace covkl::harness {
namespace {

Eigen::MatrixXd lower_cholesky(const Eigen::MatrixXd& s) {
  Eigen::LLT<Eigen::MatrixXd> llt(s);
  if (llt.info() != Eigen::Success) throw ConfigError("matrix is not positive definite");
  return llt.matrixL();
}

} // namespace

Dataset sample_gaussian(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, std::size_t n,
                        std::uint64_t seed) {
  const auto d = mean.size();
  if (cov.rows() != d || cov.cols() != d) throw ConfigError("mean/covariance size mismatch");
  const Eigen::MatrixXd l = lower_cholesky(cov);
  rng::Engine eng(rng::derive(seed, "gaussian"));
  std::normal_distribution<double> normal;
  PointMatrix x(static_cast<Eigen::Index>(n), d);
  Eigen::VectorXd z(d);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) z(j) = normal(eng);
    x.row(i) = (mean + l * z).transpose();
  }
  return Dataset::from_continuous(x);
}

Dataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  const auto d = static_cast<Eigen::Index>(spec.dim);
  if (d < 1) throw ConfigError("synthetic data needs dim >= 1");
  Eigen::MatrixXd corr;
  if (spec.corr) {
    corr = *spec.corr;
    if (corr.rows() != d || corr.cols() != d) throw ConfigError("synthetic corr has the wrong size");
  } else {
    corr = Eigen::MatrixXd::Constant(d, d, spec.rho);
    corr.diagonal().setOnes();
  }
  if (spec.margin != "normal" && spec.margin != "lognormal" && spec.margin != "uniform")
    throw ConfigError("unknown synthetic margin '" + spec.margin + "'");
  const Eigen::MatrixXd l = lower_cholesky(corr);
  rng::Engine eng(rng::derive(seed, "synthetic"));
  std::normal_distribution<double> normal;
  PointMatrix x(static_cast<Eigen::Index>(spec.n), d);
  Eigen::VectorXd z(d);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) z(j) = normal(eng);
    const Eigen::VectorXd v = l * z;
    for (Eigen::Index j = 0; j < d; ++j) {
      if (spec.margin == "lognormal")
        x(i, j) = std::exp(spec.sigma * v(j));
      else if (spec.margin == "uniform")
        x(i, j) = stats::normal_cdf(v(j));
      else
        x(i, j) = v(j);
    }
  }
  return Dataset::from_continuous(x, spec.names);
}

} // namespace covkl::harness
