#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <optional>

namespace covkl {

/// Points are rows; each row is contiguous.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CodeMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MaskMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 0.0;
  double width() const { return upper - lower; }
  bool contains(double v) const { return lower <= v && v <= upper; }
};

/// A KL divergence estimate in nats. The value may be negative.
struct KlEstimate {
  double value = 0.0;
  std::size_t n = 0; ///< p-sample size
  std::size_t m = 0; ///< q-sample size
  std::size_t d = 0; ///< continuous dimension
  std::optional<ConfidenceInterval> ci;
  double level = 0.0;         ///< confidence level of `ci`, e.g. 0.95
  std::size_t failures = 0;   ///< failed subsampling replicates
};

} // namespace covkl
