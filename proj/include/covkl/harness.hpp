#pragma once

#include "covkl/data.hpp"
#include "covkl/models.hpp"
#include "covkl/uq.hpp"

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace covkl::harness {

/// Gaussian-copula data with a chosen margin family. Columns x1..xd unless named.
struct SyntheticSpec {
  std::size_t n = 1000;
  std::size_t dim = 2;
  double rho = 0.0;                    ///< equicorrelation, used when `corr` is empty
  std::optional<Eigen::MatrixXd> corr; ///< full copula correlation
  std::string margin = "normal";       ///< normal | lognormal | uniform
  double sigma = 1.0;                  ///< lognormal shape
  std::vector<std::string> names;
};

Dataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);
/// n draws from N(mean, cov) as a purely continuous dataset.
Dataset sample_gaussian(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, std::size_t n,
                        std::uint64_t seed);

enum class Experiment { eval, missing, latent, scale, benchmark };
std::string to_string(Experiment e);
Experiment experiment_from_string(const std::string& s);

/// A model under evaluation: an internal fitter, or a sample produced
/// elsewhere (vine copula, MICE, ...) read from CSV.
struct ModelSpec {
  std::string name;
  std::optional<ModelKind> kind;
  std::filesystem::path external;
};

struct GaussianCase {
  std::string name;
  Eigen::VectorXd mu_p;
  Eigen::MatrixXd cov_p;
  Eigen::VectorXd mu_q;
  Eigen::MatrixXd cov_q;
  std::size_t n = 1000;
  std::size_t m = 1000;
  std::size_t replicates = 1;
};

struct ExperimentConfig {
  std::string id = "experiment";
  Experiment experiment = Experiment::eval;
  std::optional<std::filesystem::path> data_path;
  Schema schema;
  std::string missing_token;
  std::optional<SyntheticSpec> synthetic;
  std::vector<ModelSpec> models;
  std::size_t n_sim = 10000;
  SubsamplingConfig subsampling;
  bool compute_ci = true;
  std::vector<double> missing_fractions{0.0, 0.1, 0.3, 0.5};
  std::vector<std::string> missing_columns; ///< empty: every column
  std::vector<std::string> observed;        ///< latent experiment: the observed columns
  std::vector<GaussianCase> cases;          ///< benchmark
  std::vector<std::string> estimators{"bc", "nn"};
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = ".";

  void validate() const;
};

/// Parses an experiment or benchmark JSON document. Relative paths resolve
/// against `base_dir`.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = ".");

struct ResultRow {
  std::string experiment;
  std::string model;
  std::string evaluation; ///< train, test, direct, marginalized, original, uniform
  std::optional<double> scenario; ///< e.g. the missing fraction p
  double kl_estimate = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  double kl_clamped = 0.0; ///< max(0, kl_estimate)
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::size_t m_effective = 0; ///< model sample size after deduplication
  std::size_t failures = 0;
  std::uint64_t seed = 0;
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
};

/// Fit on a random half, evaluate against both halves.
std::vector<ResultRow> run_eval(const ExperimentConfig& cfg);
/// MCAR missingness injected into the training half, evaluated on the test half.
std::vector<ResultRow> run_missing(const ExperimentConfig& cfg);
/// Direct fit on the observed columns vs full fit marginalised to them.
std::vector<ResultRow> run_latent(const ExperimentConfig& cfg);
/// Test-half evaluation on the original and on the uniform scale.
std::vector<ResultRow> run_scale(const ExperimentConfig& cfg);
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);

struct BenchmarkRow {
  std::string case_name;
  std::string estimator;
  std::size_t replicate = 0;
  double estimate = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  double truth = 0.0;
  bool covered = false;
  std::size_t failures = 0;
  std::string status = "ok";
};

struct BenchmarkSummary {
  std::string case_name;
  std::string estimator;
  std::size_t replicates = 0;
  std::size_t succeeded = 0;
  double truth = 0.0;
  double median_estimate = 0.0;
  double coverage = 0.0;
  double median_ci_width = 0.0;
};

std::vector<BenchmarkRow> run_benchmark(const ExperimentConfig& cfg);
std::vector<BenchmarkSummary> summarize(const std::vector<BenchmarkRow>& rows);

std::string rows_to_csv(const std::vector<ResultRow>& rows);
std::string benchmark_rows_to_csv(const std::vector<BenchmarkRow>& rows);
std::string summary_to_csv(const std::vector<BenchmarkSummary>& rows);

/// Runs the configured experiment and writes `<id>.csv` (plus
/// `<id>_summary.csv` for benchmarks) and `<id>_manifest.json` into the output
/// directory. Returns the written paths.
std::vector<std::filesystem::path> run_and_write(const ExperimentConfig& cfg,
                                                 const std::string& config_echo,
                                                 bool record_timings = false);

} // namespace covkl::harness
