#include "confbench/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "confbench/errors.hpp"

namespace confbench {

int argmax_class(std::span<const double> dist) {
  if (dist.empty()) throw ShapeError("argmax_class: empty distribution");
  std::size_t best = 0;
  for (std::size_t j = 1; j < dist.size(); ++j) {
    if (dist[j] > dist[best]) best = j;
  }
  return static_cast<int>(best);
}

double mcp(std::span<const double> dist) {
  return dist[static_cast<std::size_t>(argmax_class(dist))];
}

double tcp(std::span<const double> dist, int true_class) {
  if (true_class < 0 || static_cast<std::size_t>(true_class) >= dist.size()) {
    throw IndexError("tcp: class " + std::to_string(true_class) + " outside [0, " +
                     std::to_string(dist.size()) + ")");
  }
  return dist[static_cast<std::size_t>(true_class)];
}

double tcp_ratio(std::span<const double> dist, int true_class) {
  const double top = mcp(dist);
  if (top <= 0.0) {
    throw NumericError("tcp_ratio: degenerate distribution with mcp = " + std::to_string(top));
  }
  const double value = tcp(dist, true_class);
  // Exactly 1 on correct predictions, by construction rather than division.
  return argmax_class(dist) == true_class ? 1.0 : value / top;
}

double entropy_confidence(std::span<const double> dist) {
  const std::size_t k = dist.size();
  if (k < 2) throw ShapeError("entropy_confidence: need at least 2 classes");
  std::vector<double> sorted(dist.begin(), dist.end());
  std::sort(sorted.begin(), sorted.end());
  double entropy = 0.0;
  for (double p : sorted) {
    if (p > 0.0) entropy -= p * std::log(p);
  }
  return 1.0 - entropy / std::log(static_cast<double>(k));
}

GuaranteeReport check_guarantees(const Prediction& prediction, const std::vector<int>& labels) {
  const std::size_t n = prediction.size();
  if (n != labels.size()) {
    throw ShapeError("check_guarantees: " + std::to_string(n) + " predictions vs " +
                     std::to_string(labels.size()) + " labels");
  }
  const std::size_t k = prediction.probs.cols();
  const double lower = 1.0 / static_cast<double>(k);

  GuaranteeReport report;
  report.total = n;
  for (std::size_t i = 0; i < n; ++i) {
    const double true_prob = tcp(
        std::span<const double>(prediction.probs.data.data() + i * k, k), labels[i]);
    const bool correct = prediction.predicted[i] == labels[i];
    if (true_prob > 0.5 && !correct) {
      throw GuaranteeViolation("sample " + std::to_string(i) + ": tcp = " +
                               std::to_string(true_prob) + " > 1/2 but prediction is wrong");
    }
    if (true_prob < lower && correct) {
      throw GuaranteeViolation("sample " + std::to_string(i) + ": tcp = " +
                               std::to_string(true_prob) + " < 1/K but prediction is right");
    }
    if (true_prob >= lower && true_prob <= 0.5) {
      ++report.overlap_count;
      if (correct) {
        ++report.overlap_successes;
      } else {
        ++report.overlap_errors;
      }
    }
  }
  return report;
}

GuaranteeReport check_guarantees(const LabeledDataset& dataset, const TrainedClassifier& model) {
  return check_guarantees(model.predict(dataset.features), dataset.labels);
}

}  // namespace confbench
