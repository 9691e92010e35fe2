#include "covkl/nn.hpp"

#include "covkl/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace covkl {

NeighborIndex::NeighborIndex(PointMatrix points, std::size_t leaf_size)
    : points_(std::move(points)), leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
  if (points_.rows() < 1 || points_.cols() < 1)
    throw ConfigError("neighbour index needs at least one point of dimension >= 1");
  if (!points_.allFinite()) throw ConfigError("neighbour index received non-finite coordinates");
  order_.resize(size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  nodes_.reserve(2 * size() / leaf_size_ + 2);
  build(0, size());
}

std::size_t NeighborIndex::build(std::size_t begin, std::size_t end) {
  const std::size_t d = dim();
  const std::size_t id = nodes_.size();
  nodes_.push_back({begin, end, 0, 0, boxes_.size()});
  boxes_.resize(boxes_.size() + 2 * d);
  double* lo = boxes_.data() + nodes_[id].box;
  double* hi = lo + d;
  for (std::size_t j = 0; j < d; ++j) {
    lo[j] = std::numeric_limits<double>::infinity();
    hi[j] = -std::numeric_limits<double>::infinity();
  }
  for (std::size_t t = begin; t < end; ++t) {
    const double* p = point(order_[t]);
    for (std::size_t j = 0; j < d; ++j) {
      lo[j] = std::min(lo[j], p[j]);
      hi[j] = std::max(hi[j], p[j]);
    }
  }
  if (end - begin <= leaf_size_) return id;
  std::size_t split_dim = 0;
  double widest = -1.0;
  for (std::size_t j = 0; j < d; ++j) {
    if (hi[j] - lo[j] > widest) {
      widest = hi[j] - lo[j];
      split_dim = j;
    }
  }
  if (widest <= 0.0) return id; // all points identical
  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                   order_.begin() + static_cast<std::ptrdiff_t>(mid),
                   order_.begin() + static_cast<std::ptrdiff_t>(end),
                   [&](std::size_t a, std::size_t b) {
                     return point(a)[split_dim] < point(b)[split_dim];
                   });
  const std::size_t left = build(begin, mid);
  const std::size_t right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

double NeighborIndex::box_sq_distance(const Node& node, const double* q) const {
  const std::size_t d = dim();
  const double* lo = boxes_.data() + node.box;
  const double* hi = lo + d;
  double s = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    double t = 0.0;
    if (q[j] < lo[j])
      t = lo[j] - q[j];
    else if (q[j] > hi[j])
      t = q[j] - hi[j];
    s += t * t;
  }
  return s;
}

namespace {
bool closer(const Neighbor& a, const Neighbor& b) { return a.sq_distance < b.sq_distance; }
} // namespace

void NeighborIndex::search_knn(std::size_t id, const double* q, std::size_t want,
                               std::vector<Neighbor>& heap) const {
  const Node& node = nodes_[id];
  if (node.left == 0) {
    for (std::size_t t = node.begin; t < node.end; ++t) {
      const std::size_t idx = order_[t];
      const double d2 = squared_distance(q, point(idx), dim());
      if (heap.size() < want) {
        heap.push_back({d2, idx});
        std::push_heap(heap.begin(), heap.end(), closer);
      } else if (d2 < heap.front().sq_distance) {
        std::pop_heap(heap.begin(), heap.end(), closer);
        heap.back() = {d2, idx};
        std::push_heap(heap.begin(), heap.end(), closer);
      }
    }
    return;
  }
  const double dl = box_sq_distance(nodes_[node.left], q);
  const double dr = box_sq_distance(nodes_[node.right], q);
  const std::size_t first = dl <= dr ? node.left : node.right;
  const std::size_t second = dl <= dr ? node.right : node.left;
  const double d_first = std::min(dl, dr);
  const double d_second = std::max(dl, dr);
  if (heap.size() < want || d_first < heap.front().sq_distance) search_knn(first, q, want, heap);
  if (heap.size() < want || d_second < heap.front().sq_distance) search_knn(second, q, want, heap);
}

Neighbor NeighborIndex::knn(std::span<const double> query, std::size_t k,
                            bool exclude_exact_match) const {
  if (query.size() != dim()) throw ConfigError("query dimension does not match the index");
  if (k == 0) throw ConfigError("neighbour rank k must be >= 1");
  const std::size_t want = std::min(size(), k + (exclude_exact_match ? 1 : 0));
  std::vector<Neighbor> heap;
  heap.reserve(want);
  search_knn(0, query.data(), want, heap);
  std::sort_heap(heap.begin(), heap.end(), closer);
  std::size_t rank = k - 1;
  std::size_t eligible = size();
  if (exclude_exact_match && !heap.empty() && heap.front().sq_distance == 0.0) {
    rank = k;
    eligible = size() - 1;
  }
  if (k > eligible)
    throw ConfigError("neighbour rank k=" + std::to_string(k) + " exceeds the " +
                      std::to_string(eligible) + " eligible points");
  return heap[rank];
}

double NeighborIndex::knn_distance(std::span<const double> query, std::size_t k,
                                   bool exclude_exact_match) const {
  return std::sqrt(knn(query, k, exclude_exact_match).sq_distance);
}

void NeighborIndex::search_count(std::size_t id, const double* q, double r2, std::size_t& count,
                                 std::size_t& zeros) const {
  const Node& node = nodes_[id];
  if (box_sq_distance(node, q) > r2) return;
  if (node.left == 0) {
    for (std::size_t t = node.begin; t < node.end; ++t) {
      const double d2 = squared_distance(q, point(order_[t]), dim());
      if (d2 <= r2) {
        ++count;
        if (d2 == 0.0) ++zeros;
      }
    }
    return;
  }
  search_count(node.left, q, r2, count, zeros);
  search_count(node.right, q, r2, count, zeros);
}

std::size_t NeighborIndex::count_within_sq_radius(std::span<const double> query, double r2,
                                                  bool exclude_exact_match) const {
  if (query.size() != dim()) throw ConfigError("query dimension does not match the index");
  if (!(r2 >= 0.0)) throw ConfigError("radius must be non-negative");
  std::size_t count = 0;
  std::size_t zeros = 0;
  search_count(0, query.data(), r2, count, zeros);
  if (exclude_exact_match && zeros > 0) --count;
  return count;
}

std::size_t NeighborIndex::count_within_radius(std::span<const double> query, double r,
                                               bool exclude_exact_match) const {
  if (!(r >= 0.0)) throw ConfigError("radius must be non-negative");
  // Largest r2 with sqrt(r2) <= r, so the count agrees with distances
  // reported by knn_distance.
  double r2 = r * r;
  while (std::sqrt(r2) > r) r2 = std::nextafter(r2, 0.0);
  for (double up = std::nextafter(r2, INFINITY); std::sqrt(up) <= r; up = std::nextafter(up, INFINITY))
    r2 = up;
  return count_within_sq_radius(query, r2, exclude_exact_match);
}

namespace {

std::vector<std::size_t> lexicographic_order(const PointMatrix& p) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(p.rows()));
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const auto d = p.cols();
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const double* ra = p.data() + a * static_cast<std::size_t>(d);
    const double* rb = p.data() + b * static_cast<std::size_t>(d);
    for (Eigen::Index j = 0; j < d; ++j) {
      if (ra[j] < rb[j]) return true;
      if (rb[j] < ra[j]) return false;
    }
    return a < b;
  });
  return idx;
}

bool same_row(const PointMatrix& a, std::size_t i, const PointMatrix& b, std::size_t j) {
  for (Eigen::Index c = 0; c < a.cols(); ++c)
    if (!(a(static_cast<Eigen::Index>(i), c) == b(static_cast<Eigen::Index>(j), c))) return false;
  return true;
}

} // namespace

std::optional<std::pair<std::size_t, std::size_t>> find_duplicate_points(const PointMatrix& points) {
  if (points.rows() < 2) return std::nullopt;
  const auto idx = lexicographic_order(points);
  std::optional<std::pair<std::size_t, std::size_t>> best;
  for (std::size_t t = 0; t + 1 < idx.size();) {
    std::size_t u = t + 1;
    while (u < idx.size() && same_row(points, idx[t], points, idx[u])) ++u;
    // within a run indices ascend, so (idx[t], idx[t+1]) is the run's earliest pair
    if (u > t + 1 && (!best || idx[t + 1] < best->second)) best = std::pair{idx[t], idx[t + 1]};
    t = u;
  }
  return best;
}

std::optional<std::pair<std::size_t, std::size_t>> find_shared_point(const PointMatrix& a,
                                                                     const PointMatrix& b) {
  if (a.rows() == 0 || b.rows() == 0) return std::nullopt;
  if (a.cols() != b.cols()) throw ConfigError("point sets have different dimensions");
  const auto ia = lexicographic_order(a);
  const auto ib = lexicographic_order(b);
  const auto d = a.cols();
  auto less = [&](const PointMatrix& p, std::size_t i, const PointMatrix& q, std::size_t j) {
    for (Eigen::Index c = 0; c < d; ++c) {
      const double u = p(static_cast<Eigen::Index>(i), c);
      const double v = q(static_cast<Eigen::Index>(j), c);
      if (u < v) return true;
      if (v < u) return false;
    }
    return false;
  };
  std::optional<std::pair<std::size_t, std::size_t>> best;
  std::size_t s = 0;
  std::size_t t = 0;
  while (s < ia.size() && t < ib.size()) {
    if (less(a, ia[s], b, ib[t])) {
      ++s;
    } else if (less(b, ib[t], a, ia[s])) {
      ++t;
    } else {
      if (!best || ia[s] < best->first) best = std::pair{ia[s], ib[t]};
      ++s;
    }
  }
  return best;
}

} // namespace covkl
