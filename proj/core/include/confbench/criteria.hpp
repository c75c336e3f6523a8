#ifndef CONFBENCH_CRITERIA_HPP
#define CONFBENCH_CRITERIA_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "confbench/classifier.hpp"
#include "confbench/dataset.hpp"

namespace confbench {

/// Argmax over one softmax row; ties resolved to the lowest class index so
/// every downstream check is deterministic.
int argmax_class(std::span<const double> dist);

/// Maximum class probability — the standard softmax confidence baseline.
double mcp(std::span<const double> dist);

/// True class probability P(Y = y* | w, x).
double tcp(std::span<const double> dist, int true_class);

/// TCP normalized by MCP: exactly 1 on correct predictions, in [0, 1) on
/// errors.
double tcp_ratio(std::span<const double> dist, int true_class);

/// 1 - H(p)/ln K, so the value is a confidence in [0, 1]: 1 for a one-hot
/// distribution, 0 for the uniform one. Terms are accumulated in sorted
/// order, which makes the result exactly invariant under permutations.
double entropy_confidence(std::span<const double> dist);

struct GuaranteeReport {
  std::size_t total = 0;
  std::size_t violations = 0;        // always 0 when the call returns
  std::size_t overlap_count = 0;     // samples with tcp in [1/K, 1/2]
  std::size_t overlap_errors = 0;
  std::size_t overlap_successes = 0;

  double overlap_mass() const {
    return total == 0 ? 0.0 : static_cast<double>(overlap_count) / static_cast<double>(total);
  }
};

/// Verifies the two guarantees on every sample — tcp > 1/2 implies a correct
/// prediction and tcp < 1/K implies an incorrect one — and measures the
/// no-guarantee zone [1/K, 1/2]. A violation throws GuaranteeViolation: the
/// guarantees are theorems, so a failure is an implementation bug.
GuaranteeReport check_guarantees(const Prediction& prediction, const std::vector<int>& labels);
GuaranteeReport check_guarantees(const LabeledDataset& dataset, const TrainedClassifier& model);

}  // namespace confbench

#endif  // CONFBENCH_CRITERIA_HPP
