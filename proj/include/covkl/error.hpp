#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace covkl {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid input, configuration, or file contents. The CLI maps these to exit code 1.
class ConfigError : public Error {
public:
  using Error::Error;
};

class ParseError : public ConfigError {
public:
  ParseError(const std::string& msg, std::size_t row, std::string column)
      : ConfigError(msg), row_(row), column_(std::move(column)) {}
  std::size_t row() const { return row_; }
  const std::string& column() const { return column_; }

private:
  std::size_t row_;
  std::string column_;
};

/// Failure while fitting or estimating. The CLI maps these to exit code 2.
class EstimationError : public Error {
public:
  using Error::Error;
};

class FitError : public EstimationError {
public:
  using EstimationError::EstimationError;
};

/// Two points that must differ are identical. `sample` names where the second
/// point lives: "x", "y", or "x/y" for a cross-sample coincidence.
class DuplicatePointsError : public EstimationError {
public:
  DuplicatePointsError(const std::string& msg, std::string sample, std::size_t first,
                       std::size_t second)
      : EstimationError(msg), sample_(std::move(sample)), first_(first), second_(second) {}
  const std::string& sample() const { return sample_; }
  std::size_t first() const { return first_; }
  std::size_t second() const { return second_; }

private:
  std::string sample_;
  std::size_t first_;
  std::size_t second_;
};

/// p puts mass where q has none.
class InfiniteDivergenceError : public EstimationError {
public:
  using EstimationError::EstimationError;
};

/// A discrete stratum is too small for the continuous estimator.
class StratumError : public EstimationError {
public:
  StratumError(const std::string& msg, std::string stratum)
      : EstimationError(msg), stratum_(std::move(stratum)) {}
  const std::string& stratum() const { return stratum_; }

private:
  std::string stratum_;
};

/// Too many subsampling replicates failed.
class SubsamplingError : public EstimationError {
public:
  SubsamplingError(const std::string& msg, std::size_t failures, std::size_t replicates)
      : EstimationError(msg), failures_(failures), replicates_(replicates) {}
  std::size_t failures() const { return failures_; }
  std::size_t replicates() const { return replicates_; }

private:
  std::size_t failures_;
  std::size_t replicates_;
};

} // namespace covkl
