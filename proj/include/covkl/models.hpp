#pragma once

#include "covkl/data.hpp"
#include "covkl/types.hpp"

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace covkl {

/// Smooth estimate of a univariate distribution function: a Gaussian-kernel
/// mixture centred on the training values,
///   F(t) = (1/n) sum_i Phi((t - x_i) / h),
/// with Silverman's bandwidth. F is strictly increasing and continuous.
class MarginModel {
public:
  /// Fits on the non-missing entries of `values` (mask may be empty).
  static MarginModel fit(std::span<const double> values, std::span<const bool> missing = {});

  /// Rebuilds a fitted margin from its training values and bandwidth.
  MarginModel(std::vector<double> values, double bandwidth);

  double cdf(double t) const;
  double density(double t) const;
  /// F^{-1}(u) for u in (0, 1).
  double quantile(double u) const;

  double clamp(double u) const;
  /// clamp(cdf(t)), the value used on the uniform scale.
  double to_uniform(double t) const { return clamp(cdf(t)); }

  double u_min() const { return u_min_; }
  double u_max() const { return u_max_; }
  double bandwidth() const { return h_; }
  double range() const { return values_.back() - values_.front(); }
  std::size_t n() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }

private:
  // F and f together over the kernels that matter at t.
  std::pair<double, double> cdf_density(double t) const;

  std::vector<double> values_; // sorted
  double h_;
  double u_min_;
  double u_max_;
  // F and f at a subset of the training values; brackets and seeds quantile searches.
  std::vector<double> knot_x_;
  std::vector<double> knot_cdf_;
  std::vector<double> knot_pdf_;
};

/// Silverman's rule 0.9 * min(sd, IQR/1.34) * n^(-1/5); sd alone when the IQR is 0.
double silverman_bandwidth(std::span<const double> sorted_values);

MarginModel fit_margin(std::span<const double> values, std::span<const bool> missing = {});
double margin_quantile(const MarginModel& margin, double u);

/// Cell (i, j) = margins[j].to_uniform(x_ij) over the continuous columns;
/// missing cells are NaN (the dataset mask still flags them).
PointMatrix to_uniform(const Dataset& ds, const std::vector<MarginModel>& margins);

/// One margin per continuous column, fitted on available cases.
std::vector<MarginModel> fit_margins(const Dataset& ds);

enum class ModelKind { gauss_dist, indep_cop, gauss_cop };
std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

struct GaussDistFit {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};
struct IndepCopFit {
  std::vector<MarginModel> margins;
};
struct GaussCopFit {
  std::vector<MarginModel> margins;
  Eigen::MatrixXd corr;
};
using ContinuousFit = std::variant<GaussDistFit, IndepCopFit, GaussCopFit>;

/// Joint pmf over discrete-code tuples. `per_stratum` holds one continuous
/// fit per key when strata are large enough; otherwise it is empty and the
/// model's shared continuous fit is used for every key.
struct DiscreteBlock {
  std::vector<std::vector<int>> keys;
  std::vector<double> pmf;
  std::vector<ContinuousFit> per_stratum;
};

struct FitOptions {
  /// Allows GaussDist on data with missing cells (available-case moments).
  bool allow_missing_gauss_dist = false;
};

/// A fitted covariate distribution model.
class FittedModel {
public:
  FittedModel(ModelKind kind, Schema schema, std::vector<std::vector<std::string>> labels,
              std::optional<ContinuousFit> shared, std::optional<DiscreteBlock> discrete);

  ModelKind kind() const { return kind_; }
  const Schema& schema() const { return schema_; }
  const std::vector<std::vector<std::string>>& labels() const { return labels_; }
  const std::optional<ContinuousFit>& shared() const { return shared_; }
  const std::optional<DiscreteBlock>& discrete() const { return discrete_; }

private:
  ModelKind kind_;
  Schema schema_;
  std::vector<std::vector<std::string>> labels_;
  std::optional<ContinuousFit> shared_;
  std::optional<DiscreteBlock> discrete_;
};

/// Sample mean and covariance (denominator n-1) of the continuous columns,
/// with eigenvalues floored at 1e-10 * trace / d.
FittedModel fit_gauss_dist(const Dataset& ds, const FitOptions& options = {});
FittedModel fit_indep_cop(const Dataset& ds, const std::vector<MarginModel>& margins);
/// Pairwise-complete correlation of normal scores Phi^{-1}(u), repaired to a
/// positive definite correlation matrix.
FittedModel fit_gauss_cop(const Dataset& ds, const std::vector<MarginModel>& margins);

/// Fits any model kind, including the discrete block for mixed data.
FittedModel fit_model(const Dataset& ds, ModelKind kind, const FitOptions& options = {});

/// Normal-score correlation of a Gaussian copula (before PD repair).
Eigen::MatrixXd pairwise_normal_score_correlation(const Dataset& ds,
                                                  const std::vector<MarginModel>& margins);
/// Returns `corr` unchanged when its smallest eigenvalue is >= floor; otherwise
/// clips eigenvalues at floor and rescales to unit diagonal.
Eigen::MatrixXd repair_correlation(const Eigen::MatrixXd& corr, double floor = 1e-6);

/// n_sim draws; draw i uses an RNG stream derived from (seed, i).
Dataset sample_model(const FittedModel& model, std::size_t n_sim, std::uint64_t seed);

} // namespace covkl
