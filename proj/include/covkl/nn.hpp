#pragma once

#include "covkl/types.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace covkl {

/// Squared Euclidean distance, summed in coordinate order. Every neighbour
/// routine (tree and brute force) goes through this so results agree bitwise.
inline double squared_distance(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    const double t = a[j] - b[j];
    s += t * t;
  }
  return s;
}

struct Neighbor {
  double sq_distance;
  std::size_t index;
};

/// Exact Euclidean neighbour search over a fixed point set (kd-tree with
/// bounding boxes). Immutable after construction; concurrent queries are safe.
///
/// With `exclude_exact_match`, one point at distance zero from the query (the
/// query itself, when it belongs to the set) is ignored. Further zero-distance
/// points stay visible so duplicates surface to the caller.
class NeighborIndex {
public:
  explicit NeighborIndex(PointMatrix points, std::size_t leaf_size = 12);

  std::size_t size() const { return static_cast<std::size_t>(points_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(points_.cols()); }
  const PointMatrix& points() const { return points_; }

  /// Distance to the k-th closest eligible point (k >= 1).
  double knn_distance(std::span<const double> query, std::size_t k, bool exclude_exact_match) const;
  Neighbor knn(std::span<const double> query, std::size_t k, bool exclude_exact_match) const;

  /// Number of eligible points with distance <= r.
  std::size_t count_within_radius(std::span<const double> query, double r,
                                  bool exclude_exact_match) const;
  std::size_t count_within_sq_radius(std::span<const double> query, double r2,
                                     bool exclude_exact_match) const;

private:
  struct Node {
    std::size_t begin = 0, end = 0; // range in order_
    std::size_t left = 0, right = 0; // child ids; 0 means leaf
    std::size_t box = 0;             // offset of [lo..., hi...] in boxes_
  };

  std::size_t build(std::size_t begin, std::size_t end);
  double box_sq_distance(const Node& node, const double* q) const;
  const double* point(std::size_t i) const { return points_.data() + i * dim(); }

  void search_knn(std::size_t node, const double* q, std::size_t want,
                  std::vector<Neighbor>& heap) const;
  void search_count(std::size_t node, const double* q, double r2, std::size_t& count,
                    std::size_t& zeros) const;

  PointMatrix points_;
  std::size_t leaf_size_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
  std::vector<double> boxes_;
};

/// First pair (i, j), i < j, of identical rows, minimising j.
std::optional<std::pair<std::size_t, std::size_t>> find_duplicate_points(const PointMatrix& points);
inline bool has_duplicate_points(const PointMatrix& points) {
  return find_duplicate_points(points).has_value();
}

/// First pair (i, j) with row i of `a` equal to row j of `b`, minimising i.
std::optional<std::pair<std::size_t, std::size_t>> find_shared_point(const PointMatrix& a,
                                                                     const PointMatrix& b);

} // namespace covkl
