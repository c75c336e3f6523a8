#ifndef CONFBENCH_TRUSTSCORE_HPP
#define CONFBENCH_TRUSTSCORE_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "confbench/kdtree.hpp"
#include "confbench/tensor.hpp"

namespace confbench {

enum class TrustScoreBackend { kBrute, kKdTree, kAuto };

TrustScoreBackend trustscore_backend_from_string(const std::string& name);

struct TrustScoreConfig {
  int k = 10;          // neighbor count for density filtering
  double alpha = 0.0;  // filtered fraction; 0 disables filtering
  TrustScoreBackend backend = TrustScoreBackend::kAuto;
};

/// Agreement between the classifier and a nearest-neighbor classifier:
/// score = d(x, nearest point of any class != ŷ) / d(x, nearest point of
/// class ŷ), with the denominator guarded by 1e-12. Density filtering
/// optionally drops the alpha fraction of each class with the largest
/// k-NN radius before indexing.
class TrustScoreIndex {
 public:
  static TrustScoreIndex fit(const Tensor& features, const std::vector<int>& labels,
                             int num_classes, const TrustScoreConfig& config = {});

  double score(std::span<const double> x, int predicted) const;
  std::vector<double> scores(const Tensor& queries, const std::vector<int>& predicted) const;

  std::size_t retained(int cls) const;
  int num_classes() const { return static_cast<int>(class_points_.size()); }
  bool uses_kdtree() const { return !trees_.empty(); }

 private:
  double nearest_distance_sq(int cls, std::span<const double> x) const;

  std::vector<std::vector<double>> class_points_;  // flat [n_c x dim] per class
  std::vector<KdTree> trees_;                      // parallel to class_points_ when enabled
  std::size_t dim_ = 0;
};

inline constexpr double kTrustScoreEpsilon = 1e-12;

}  // namespace confbench

#endif  // CONFBENCH_TRUSTSCORE_HPP
