#ifndef CONFBENCH_METRICS_HPP
#define CONFBENCH_METRICS_HPP

#include <filesystem>
#include <span>
#include <vector>

namespace confbench {

struct ScoredOutcome {
  double confidence = 0.0;
  bool is_error = false;
};

enum class PositiveClass { kError, kSuccess };

/// Area under the precision-recall curve by the average-precision step
/// formulation sum_n (R_n - R_{n-1}) * P_n. Equal confidences form one
/// atomic tie group per threshold. For positive = error the sweep ranks by
/// ascending confidence (low confidence flags an error); for success,
/// descending.
double aupr(std::span<const ScoredOutcome> outcomes, PositiveClass positive);

/// Mann-Whitney formulation with ties counted 0.5; successes are the
/// positive class and confidence the score.
double auroc(std::span<const ScoredOutcome> outcomes);

/// Successes are positives, accepted iff confidence >= tau. tau is the
/// largest threshold with TPR >= 0.95; returns the fraction of errors
/// accepted at that threshold.
double fpr_at_95_tpr(std::span<const ScoredOutcome> outcomes);

struct RiskCoveragePoint {
  double threshold = 0.0;
  double coverage = 0.0;        // fraction with confidence >= threshold
  double selective_risk = 0.0;  // errors among accepted / accepted
};

/// One point per distinct confidence plus synthetic endpoints below the
/// minimum (coverage 1, risk = global error rate) and above the maximum
/// (coverage 0, risk 0), ordered by increasing threshold.
std::vector<RiskCoveragePoint> risk_coverage(std::span<const ScoredOutcome> outcomes);

/// CSV exchange format: header `confidence,is_error`, one row per sample,
/// is_error in {0, 1}.
std::vector<ScoredOutcome> read_outcomes_csv(const std::filesystem::path& path);
void write_outcomes_csv(const std::filesystem::path& path,
                        std::span<const ScoredOutcome> outcomes);

}  // namespace confbench

#endif  // CONFBENCH_METRICS_HPP
