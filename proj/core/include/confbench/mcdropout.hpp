#ifndef CONFBENCH_MCDROPOUT_HPP
#define CONFBENCH_MCDROPOUT_HPP

#include <cstdint>
#include <vector>

#include "confbench/classifier.hpp"
#include "confbench/tensor.hpp"

namespace confbench {

struct McDropoutConfig {
  int passes = 100;
  std::uint64_t seed = 0;
};

/// Monte-Carlo dropout: averages the softmax over `passes` stochastic
/// forward passes (dropout kept active) and scores the mean distribution by
/// normalized entropy confidence. The scorer owns a clone of the model and
/// reseeds the dropout streams per pass, so identical calls give identical
/// results.
class McDropoutScorer {
 public:
  McDropoutScorer(const TrainedClassifier& model, McDropoutConfig config);

  /// [N x K] mean of the per-pass softmax outputs; each row sums to 1 up to
  /// rounding.
  Tensor mean_distribution(const Tensor& inputs);

  /// entropy_confidence of each mean row.
  std::vector<double> scores(const Tensor& inputs);

 private:
  TrainedClassifier model_;
  McDropoutConfig config_;
};

}  // namespace confbench

#endif  // CONFBENCH_MCDROPOUT_HPP
