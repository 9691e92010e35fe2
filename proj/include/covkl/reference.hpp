#pragma once

// Serial brute-force implementations. They share no code with the tree-based
// parallel paths beyond `squared_distance`, and serve as test oracles and
// benchmark baselines.

#include "covkl/kld.hpp"
#include "covkl/types.hpp"

#include <span>

namespace covkl::reference {

/// Sorted squared distances from `query` to every row of `points`.
std::vector<double> sorted_sq_distances(const PointMatrix& points, std::span<const double> query);

double knn_distance(const PointMatrix& points, std::span<const double> query, std::size_t k,
                    bool exclude_exact_match);
std::size_t count_within_radius(const PointMatrix& points, std::span<const double> query, double r,
                                bool exclude_exact_match);

NeighborStats neighbor_stats(const PointMatrix& x, const PointMatrix& y);
KlEstimate kld_est_bc(const PointMatrix& x, const PointMatrix& y);
KlEstimate kld_est_nn(const PointMatrix& x, const PointMatrix& y, std::size_t k = 1);

} // namespace covkl::reference
