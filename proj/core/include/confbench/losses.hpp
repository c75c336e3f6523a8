#ifndef CONFBENCH_LOSSES_HPP
#define CONFBENCH_LOSSES_HPP

#include <vector>

#include "confbench/tensor.hpp"

namespace confbench {

struct LossResult {
  double value = 0.0;
  Tensor grad;  // gradient w.r.t. the first argument
};

struct SoftmaxCrossEntropyResult {
  double value = 0.0;
  Tensor grad_logits;  // (softmax - onehot) / batch
  Tensor probs;        // softmax of the logits
};

/// Mean over the batch of -log P(Y = y*), computed from logits with the
/// fused softmax + cross-entropy backward (softmax - onehot) / batch.
SoftmaxCrossEntropyResult softmax_cross_entropy(const Tensor& logits,
                                                const std::vector<int>& labels);

/// Mean of -log probs[i, labels[i]] over rows of an already-normalized
/// distribution. Gradient is w.r.t. the probabilities.
LossResult cross_entropy(const Tensor& probs, const std::vector<int>& labels);

/// (1/N) sum (pred_i - target_i)^2 with gradient 2 (pred - target) / N.
LossResult mse_loss(const Tensor& pred, const Tensor& target);

/// Binary cross entropy with predictions clamped to [1e-7, 1 - 1e-7].
/// Targets must be 0 or 1 (1 = correct prediction).
LossResult bce_loss(const Tensor& pred, const Tensor& target);

/// BCE scaled per-sample by (1 - p_t)^gamma, which down-weights easy
/// examples. gamma = 0 reduces exactly to bce_loss.
LossResult focal_loss(const Tensor& pred, const Tensor& target, double gamma = 2.0);

struct RankingLossResult {
  double value = 0.0;
  Tensor grad;
  bool has_pairs = false;  // false when the batch had no (correct, incorrect) pair
};

/// Margin ranking loss over all in-batch (correct, incorrect) pairs:
/// mean of max(0, margin - (score_correct - score_incorrect)). A batch
/// without both kinds scores 0 with has_pairs = false.
RankingLossResult ranking_loss(const Tensor& scores, const Tensor& correctness,
                               double margin = 0.1);

}  // namespace confbench

#endif  // CONFBENCH_LOSSES_HPP
