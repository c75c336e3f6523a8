#ifndef CONFBENCH_KDTREE_HPP
#define CONFBENCH_KDTREE_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace confbench {

/// Exact nearest-neighbor index over fixed-dimension points. Splits at the
/// median of the widest dimension; queries prune with the splitting-plane
/// distance, so results match a brute-force scan (the squared distance to
/// the winning point is computed with the same loop, hence identical bits).
class KdTree {
 public:
  KdTree() = default;
  KdTree(std::vector<double> points, std::size_t dim);

  /// Squared Euclidean distance to the nearest indexed point.
  double nearest_sq(std::span<const double> query) const;

  std::size_t size() const { return count_; }
  std::size_t dim() const { return dim_; }

 private:
  struct Node {
    int left = -1;   // -1 marks a leaf
    int right = -1;
    std::size_t start = 0;  // leaf: index range into order_
    std::size_t count = 0;
    std::size_t axis = 0;
    double split = 0.0;
  };

  int build(std::size_t start, std::size_t count);
  void search(int node, std::span<const double> query, double& best) const;
  double point_distance_sq(std::size_t point, std::span<const double> query) const;

  std::vector<double> points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
  std::size_t dim_ = 0;
  std::size_t count_ = 0;
};

/// Reference scan: smallest squared distance from `query` to any row of the
/// flat [count x dim] point array.
double brute_force_nearest_sq(std::span<const double> points, std::size_t dim,
                              std::span<const double> query);

}  // namespace confbench

#endif  // CONFBENCH_KDTREE_HPP
