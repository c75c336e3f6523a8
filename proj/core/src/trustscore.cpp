#include "confbench/trustscore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "confbench/errors.hpp"

namespace confbench {

namespace {

// kd-trees stop paying off once the dimension gets moderately large; past
// this the early-abandoning scan wins.
constexpr std::size_t kKdTreeMaxDim = 16;

double row_distance_sq(const double* a, const double* b, std::size_t dim) {
  double sum = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    const double diff = a[d] - b[d];
    sum += diff * diff;
  }
  return sum;
}

// Distance to the k-th nearest same-class point (used by density filtering).
double knn_radius(const std::vector<double>& points, std::size_t dim, std::size_t row, int k) {
  const std::size_t n = points.size() / dim;
  std::vector<double> dists;
  dists.reserve(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    if (j == row) continue;
    dists.push_back(row_distance_sq(points.data() + row * dim, points.data() + j * dim, dim));
  }
  std::nth_element(dists.begin(), dists.begin() + (k - 1), dists.end());
  return dists[static_cast<std::size_t>(k - 1)];
}

}  // namespace

TrustScoreBackend trustscore_backend_from_string(const std::string& name) {
  if (name == "brute") return TrustScoreBackend::kBrute;
  if (name == "kdtree") return TrustScoreBackend::kKdTree;
  if (name == "auto") return TrustScoreBackend::kAuto;
  throw ConfigError("unknown trustscore backend '" + name +
                    "' (expected brute | kdtree | auto)");
}

TrustScoreIndex TrustScoreIndex::fit(const Tensor& features, const std::vector<int>& labels,
                                     int num_classes, const TrustScoreConfig& config) {
  if (features.rank() != 2) {
    throw ShapeError("trustscore: expected [N x d] features, got " + features.shape_string());
  }
  if (features.dim(0) != labels.size()) {
    throw ShapeError("trustscore: " + std::to_string(features.dim(0)) + " rows vs " +
                     std::to_string(labels.size()) + " labels");
  }
  if (num_classes < 2) throw ConfigError("trustscore: need at least 2 classes");
  if (config.alpha < 0.0 || config.alpha > 1.0) {
    throw ConfigError("trustscore: alpha must lie in [0, 1]");
  }
  if (config.k < 1) throw ConfigError("trustscore: k must be >= 1");

  const std::size_t dim = features.cols();
  TrustScoreIndex index;
  index.dim_ = dim;
  index.class_points_.resize(static_cast<std::size_t>(num_classes));

  std::vector<std::vector<double>> raw(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int cls = labels[i];
    if (cls < 0 || cls >= num_classes) {
      throw IndexError("trustscore: label " + std::to_string(cls) + " outside [0, " +
                       std::to_string(num_classes) + ")");
    }
    const double* row = features.data.data() + i * dim;
    raw[static_cast<std::size_t>(cls)].insert(raw[static_cast<std::size_t>(cls)].end(), row,
                                              row + dim);
  }

  for (int cls = 0; cls < num_classes; ++cls) {
    auto& points = raw[static_cast<std::size_t>(cls)];
    const std::size_t n = points.size() / dim;
    if (n == 0) {
      throw ConfigError("trustscore: class " + std::to_string(cls) + " has no points");
    }
    if (config.alpha <= 0.0) {
      index.class_points_[static_cast<std::size_t>(cls)] = std::move(points);
      continue;
    }
    if (n <= static_cast<std::size_t>(config.k)) {
      throw ConfigError("trustscore: class " + std::to_string(cls) + " has " +
                        std::to_string(n) + " points, density filtering needs more than k = " +
                        std::to_string(config.k));
    }
    // Keep the ceil((1 - alpha) * n) points with the smallest k-NN radius.
    const auto keep = static_cast<std::size_t>(
        std::ceil((1.0 - config.alpha) * static_cast<double>(n)));
    if (keep == 0) {
      throw ConfigError("trustscore: alpha = " + std::to_string(config.alpha) +
                        " empties class " + std::to_string(cls));
    }
    std::vector<std::pair<double, std::size_t>> radii(n);
    for (std::size_t i = 0; i < n; ++i) {
      radii[i] = {knn_radius(points, dim, i, config.k), i};
    }
    std::sort(radii.begin(), radii.end());
    std::vector<std::size_t> kept;
    kept.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) kept.push_back(radii[i].second);
    std::sort(kept.begin(), kept.end());  // preserve original row order

    std::vector<double> filtered;
    filtered.reserve(keep * dim);
    for (std::size_t row : kept) {
      filtered.insert(filtered.end(), points.begin() + static_cast<std::ptrdiff_t>(row * dim),
                      points.begin() + static_cast<std::ptrdiff_t>((row + 1) * dim));
    }
    index.class_points_[static_cast<std::size_t>(cls)] = std::move(filtered);
  }

  const bool use_tree = config.backend == TrustScoreBackend::kKdTree ||
                        (config.backend == TrustScoreBackend::kAuto && dim <= kKdTreeMaxDim);
  if (use_tree) {
    index.trees_.reserve(index.class_points_.size());
    for (const auto& points : index.class_points_) {
      index.trees_.emplace_back(points, dim);
    }
  }
  return index;
}

std::size_t TrustScoreIndex::retained(int cls) const {
  return class_points_.at(static_cast<std::size_t>(cls)).size() / dim_;
}

double TrustScoreIndex::nearest_distance_sq(int cls, std::span<const double> x) const {
  if (!trees_.empty()) return trees_[static_cast<std::size_t>(cls)].nearest_sq(x);
  const auto& points = class_points_[static_cast<std::size_t>(cls)];
  return brute_force_nearest_sq(points, dim_, x);
}

double TrustScoreIndex::score(std::span<const double> x, int predicted) const {
  if (x.size() != dim_) {
    throw ShapeError("trustscore: query has " + std::to_string(x.size()) +
                     " dimensions, index has " + std::to_string(dim_));
  }
  if (predicted < 0 || static_cast<std::size_t>(predicted) >= class_points_.size()) {
    throw IndexError("trustscore: predicted class " + std::to_string(predicted) +
                     " absent from the index");
  }
  const double d_pred = std::sqrt(nearest_distance_sq(predicted, x));
  double other_sq = std::numeric_limits<double>::infinity();
  for (int cls = 0; cls < num_classes(); ++cls) {
    if (cls == predicted) continue;
    other_sq = std::min(other_sq, nearest_distance_sq(cls, x));
  }
  const double d_other = std::sqrt(other_sq);
  return d_other / std::max(d_pred, kTrustScoreEpsilon);
}

std::vector<double> TrustScoreIndex::scores(const Tensor& queries,
                                            const std::vector<int>& predicted) const {
  if (queries.rank() != 2 || queries.dim(0) != predicted.size()) {
    throw ShapeError("trustscore: queries " + queries.shape_string() + " vs " +
                     std::to_string(predicted.size()) + " predictions");
  }
  std::vector<double> out(predicted.size());
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    out[i] = score(std::span<const double>(queries.data.data() + i * dim_, dim_), predicted[i]);
  }
  return out;
}

}  // namespace confbench
