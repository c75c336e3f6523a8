#include "confbench/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "confbench/errors.hpp"
#include "confbench/layers.hpp"

namespace confbench {

namespace {

constexpr double kBceClamp = 1e-7;

void require_labels(const std::vector<int>& labels, std::size_t batch, std::size_t k,
                    const char* context) {
  if (labels.size() != batch) {
    throw ShapeError(std::string(context) + ": " + std::to_string(labels.size()) +
                     " labels for a batch of " + std::to_string(batch));
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= k) {
      throw IndexError(std::string(context) + ": label " + std::to_string(labels[i]) +
                       " at row " + std::to_string(i) + " outside [0, " + std::to_string(k) +
                       ")");
    }
  }
}

void require_vector_pair(const Tensor& pred, const Tensor& target, const char* context) {
  if (pred.size() != target.size()) {
    throw ShapeError(std::string(context) + ": prediction " + pred.shape_string() +
                     " and target " + target.shape_string() + " differ in length");
  }
}

}  // namespace

SoftmaxCrossEntropyResult softmax_cross_entropy(const Tensor& logits,
                                                const std::vector<int>& labels) {
  const std::size_t batch = logits.rows();
  const std::size_t k = logits.cols();
  require_labels(labels, batch, k, "softmax_cross_entropy");

  SoftmaxCrossEntropyResult result;
  result.probs = softmax(logits);
  result.grad_logits = Tensor({batch, k});

  // Loss from the stabilized log-sum-exp, not from log(probs), to avoid
  // losing digits when a probability underflows.
  double total = 0.0;
  for (std::size_t i = 0; i < batch; ++i) {
    double max_logit = logits.at(i, 0);
    for (std::size_t j = 1; j < k; ++j) max_logit = std::max(max_logit, logits.at(i, j));
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) sum += std::exp(logits.at(i, j) - max_logit);
    const std::size_t y = static_cast<std::size_t>(labels[i]);
    total += std::log(sum) - (logits.at(i, y) - max_logit);
    for (std::size_t j = 0; j < k; ++j) {
      result.grad_logits.at(i, j) =
          (result.probs.at(i, j) - (j == y ? 1.0 : 0.0)) / static_cast<double>(batch);
    }
  }
  result.value = total / static_cast<double>(batch);
  return result;
}

LossResult cross_entropy(const Tensor& probs, const std::vector<int>& labels) {
  const std::size_t batch = probs.rows();
  const std::size_t k = probs.cols();
  require_labels(labels, batch, k, "cross_entropy");

  LossResult result;
  result.grad = Tensor({batch, k});
  double total = 0.0;
  for (std::size_t i = 0; i < batch; ++i) {
    const std::size_t y = static_cast<std::size_t>(labels[i]);
    const double p = std::max(probs.at(i, y), 1e-300);
    total += -std::log(p);
    result.grad.at(i, y) = -1.0 / (p * static_cast<double>(batch));
  }
  result.value = total / static_cast<double>(batch);
  return result;
}

LossResult mse_loss(const Tensor& pred, const Tensor& target) {
  require_vector_pair(pred, target, "mse_loss");
  const double n = static_cast<double>(pred.size());
  LossResult result;
  result.grad = Tensor(pred.shape);
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double diff = pred.data[i] - target.data[i];
    total += diff * diff;
    result.grad.data[i] = 2.0 * diff / n;
  }
  result.value = total / n;
  return result;
}

LossResult bce_loss(const Tensor& pred, const Tensor& target) {
  require_vector_pair(pred, target, "bce_loss");
  const double n = static_cast<double>(pred.size());
  LossResult result;
  result.grad = Tensor(pred.shape);
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double t = target.data[i];
    const double raw = pred.data[i];
    const double p = std::clamp(raw, kBceClamp, 1.0 - kBceClamp);
    total += -(t * std::log(p) + (1.0 - t) * std::log(1.0 - p));
    // Zero gradient in the clamped region.
    const double inside = (raw > kBceClamp && raw < 1.0 - kBceClamp) ? 1.0 : 0.0;
    result.grad.data[i] = inside * (-(t / p) + (1.0 - t) / (1.0 - p)) / n;
  }
  result.value = total / n;
  return result;
}

LossResult focal_loss(const Tensor& pred, const Tensor& target, double gamma) {
  require_vector_pair(pred, target, "focal_loss");
  if (gamma < 0.0) throw ConfigError("focal_loss: gamma must be >= 0");
  const double n = static_cast<double>(pred.size());
  LossResult result;
  result.grad = Tensor(pred.shape);
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double t = target.data[i];
    const double raw = pred.data[i];
    const double p = std::clamp(raw, kBceClamp, 1.0 - kBceClamp);
    const double pt = t * p + (1.0 - t) * (1.0 - p);  // probability of the true outcome
    const double weight = gamma == 0.0 ? 1.0 : std::pow(1.0 - pt, gamma);
    total += -weight * std::log(pt);

    const double inside = (raw > kBceClamp && raw < 1.0 - kBceClamp) ? 1.0 : 0.0;
    const double dweight =
        gamma == 0.0 ? 0.0 : gamma * std::pow(1.0 - pt, gamma - 1.0);
    const double dloss_dpt = dweight * std::log(pt) - weight / pt;
    const double dpt_dpred = t > 0.5 ? 1.0 : -1.0;
    result.grad.data[i] = inside * dloss_dpt * dpt_dpred / n;
  }
  result.value = total / n;
  return result;
}

RankingLossResult ranking_loss(const Tensor& scores, const Tensor& correctness,
                               double margin) {
  require_vector_pair(scores, correctness, "ranking_loss");
  RankingLossResult result;
  result.grad = Tensor(scores.shape);

  std::vector<std::size_t> correct, incorrect;
  for (std::size_t i = 0; i < correctness.size(); ++i) {
    (correctness.data[i] > 0.5 ? correct : incorrect).push_back(i);
  }
  const std::size_t pairs = correct.size() * incorrect.size();
  if (pairs == 0) {
    return result;  // value 0, has_pairs false
  }
  result.has_pairs = true;

  const double inv_pairs = 1.0 / static_cast<double>(pairs);
  double total = 0.0;
  for (std::size_t ci : correct) {
    for (std::size_t wi : incorrect) {
      const double slack = margin - (scores.data[ci] - scores.data[wi]);
      if (slack > 0.0) {
        total += slack;
        result.grad.data[ci] -= inv_pairs;
        result.grad.data[wi] += inv_pairs;
      }
    }
  }
  result.value = total * inv_pairs;
  return result;
}

}  // namespace confbench
