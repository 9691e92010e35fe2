#pragma once

#include "covkl/data.hpp"
#include "covkl/types.hpp"

#include <string>
#include <vector>

namespace covkl {

/// x and y split by exact combination of discrete codes. Keys are expressed in
/// x's label space and ordered by first appearance in x.
struct Stratification {
  struct Stratum {
    std::vector<int> key;
    std::string label; ///< e.g. "sex=F,smoker=yes"
    std::vector<std::size_t> x_rows;
    std::vector<std::size_t> y_rows;
  };
  std::vector<Stratum> strata;
  std::vector<double> p_hat; ///< relative frequency in x, per stratum
  std::vector<double> q_hat; ///< relative frequency in y, per stratum
  std::size_t n = 0;
  std::size_t m = 0;
};

/// Groups rows of x and y by discrete-code tuple. Labels are matched by
/// string, so x and y may come from separately loaded files. y rows whose
/// tuple never occurs in x are counted in m but belong to no stratum.
Stratification stratify(const Dataset& x, const Dataset& y);

/// Plug-in discrete KL divergence sum p log(p/q), with 0 log(0/q) = 0.
/// Throws InfiniteDivergenceError when p > 0 where q = 0.
double kld_est_discrete(const std::vector<double>& p_hat, const std::vector<double>& q_hat);

/// KL divergence for mixed continuous/discrete data via the chain rule:
///   sum_strata p_hat * D_bc(x_c | stratum, y_c | stratum) + D_discrete(p_hat, q_hat)
/// Without discrete columns this is exactly kld_est_bc; without continuous
/// columns it is exactly kld_est_discrete.
KlEstimate kld_est_mixed(const Dataset& x, const Dataset& y);

} // namespace covkl
