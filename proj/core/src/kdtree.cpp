#include "confbench/kdtree.hpp"

#include <algorithm>
#include <limits>

#include "confbench/errors.hpp"

namespace confbench {

namespace {
constexpr std::size_t kLeafSize = 8;
}

KdTree::KdTree(std::vector<double> points, std::size_t dim)
    : points_(std::move(points)), dim_(dim) {
  if (dim_ == 0) throw ConfigError("kdtree: dim must be positive");
  if (points_.size() % dim_ != 0) {
    throw ShapeError("kdtree: " + std::to_string(points_.size()) +
                     " values do not tile into rows of " + std::to_string(dim_));
  }
  count_ = points_.size() / dim_;
  if (count_ == 0) throw ConfigError("kdtree: no points");
  order_.resize(count_);
  for (std::size_t i = 0; i < count_; ++i) order_[i] = i;
  nodes_.reserve(2 * count_ / kLeafSize + 2);
  build(0, count_);
}

int KdTree::build(std::size_t start, std::size_t count) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({});
  if (count <= kLeafSize) {
    nodes_[id].start = start;
    nodes_[id].count = count;
    return id;
  }

  // Widest dimension over this subset.
  std::size_t axis = 0;
  double widest = -1.0;
  for (std::size_t d = 0; d < dim_; ++d) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = start; i < start + count; ++i) {
      const double v = points_[order_[i] * dim_ + d];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo > widest) {
      widest = hi - lo;
      axis = d;
    }
  }

  const std::size_t mid = start + count / 2;
  std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(start),
                   order_.begin() + static_cast<std::ptrdiff_t>(mid),
                   order_.begin() + static_cast<std::ptrdiff_t>(start + count),
                   [&](std::size_t a, std::size_t b) {
                     const double va = points_[a * dim_ + axis];
                     const double vb = points_[b * dim_ + axis];
                     return va < vb || (va == vb && a < b);
                   });

  nodes_[id].axis = axis;
  nodes_[id].split = points_[order_[mid] * dim_ + axis];
  const int left = build(start, mid - start);
  const int right = build(mid, count - (mid - start));
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

double KdTree::point_distance_sq(std::size_t point, std::span<const double> query) const {
  const double* p = points_.data() + point * dim_;
  double sum = 0.0;
  for (std::size_t d = 0; d < dim_; ++d) {
    const double diff = query[d] - p[d];
    sum += diff * diff;
  }
  return sum;
}

void KdTree::search(int node, std::span<const double> query, double& best) const {
  const Node& n = nodes_[static_cast<std::size_t>(node)];
  if (n.left < 0) {
    for (std::size_t i = n.start; i < n.start + n.count; ++i) {
      const double d = point_distance_sq(order_[i], query);
      if (d < best) best = d;
    }
    return;
  }
  const double delta = query[n.axis] - n.split;
  const int near = delta < 0.0 ? n.left : n.right;
  const int far = delta < 0.0 ? n.right : n.left;
  search(near, query, best);
  if (delta * delta < best) search(far, query, best);
}

double KdTree::nearest_sq(std::span<const double> query) const {
  if (count_ == 0) throw IndexError("kdtree: query against an empty index");
  if (query.size() != dim_) {
    throw ShapeError("kdtree: query has " + std::to_string(query.size()) +
                     " dimensions, index has " + std::to_string(dim_));
  }
  double best = std::numeric_limits<double>::infinity();
  search(0, query, best);
  return best;
}

double brute_force_nearest_sq(std::span<const double> points, std::size_t dim,
                              std::span<const double> query) {
  if (dim == 0 || points.size() % dim != 0 || points.empty()) {
    throw ShapeError("brute_force_nearest_sq: bad point array");
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size() / dim; ++i) {
    const double* p = points.data() + i * dim;
    double sum = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      const double diff = query[d] - p[d];
      sum += diff * diff;
      if (sum >= best) break;  // cannot beat the running best
    }
    if (sum < best) best = sum;
  }
  return best;
}

}  // namespace confbench
