#include "confbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <string>

#include "confbench/errors.hpp"

namespace confbench {

namespace {

struct Counts {
  std::size_t errors = 0;
  std::size_t successes = 0;
};

Counts validate(std::span<const ScoredOutcome> outcomes, const char* metric,
                bool need_both_classes) {
  if (outcomes.empty()) throw MetricError(std::string(metric) + ": no outcomes");
  Counts counts;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (!std::isfinite(outcomes[i].confidence)) {
      throw MetricError(std::string(metric) + ": non-finite confidence at row " +
                        std::to_string(i));
    }
    if (outcomes[i].is_error) {
      ++counts.errors;
    } else {
      ++counts.successes;
    }
  }
  if (need_both_classes && (counts.errors == 0 || counts.successes == 0)) {
    throw MetricError(std::string(metric) +
                      ": degenerate single-class input (needs at least one error and one "
                      "success)");
  }
  return counts;
}

// Indices sorted so the sweep visits candidates in rank order; equal
// confidences stay adjacent and form one tie group.
std::vector<std::size_t> rank_order(std::span<const ScoredOutcome> outcomes, bool ascending) {
  std::vector<std::size_t> order(outcomes.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (outcomes[a].confidence != outcomes[b].confidence) {
      return ascending ? outcomes[a].confidence < outcomes[b].confidence
                       : outcomes[a].confidence > outcomes[b].confidence;
    }
    return a < b;
  });
  return order;
}

}  // namespace

double aupr(std::span<const ScoredOutcome> outcomes, PositiveClass positive) {
  const Counts counts = validate(outcomes, "aupr", true);
  const bool error_positive = positive == PositiveClass::kError;
  const auto order = rank_order(outcomes, /*ascending=*/error_positive);
  const double total_positives =
      static_cast<double>(error_positive ? counts.errors : counts.successes);

  double ap = 0.0;
  double prev_recall = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() &&
           outcomes[order[j]].confidence == outcomes[order[i]].confidence) {
      if (outcomes[order[j]].is_error == error_positive) {
        ++tp;
      } else {
        ++fp;
      }
      ++j;
    }
    const double recall = static_cast<double>(tp) / total_positives;
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return ap;
}

double auroc(std::span<const ScoredOutcome> outcomes) {
  const Counts counts = validate(outcomes, "auroc", true);
  // Ascending sweep; every error already passed contributes a win to each
  // success above it, ties contribute half.
  const auto order = rank_order(outcomes, /*ascending=*/true);
  double u = 0.0;
  std::size_t errors_below = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    std::size_t group_errors = 0;
    std::size_t group_successes = 0;
    while (j < order.size() &&
           outcomes[order[j]].confidence == outcomes[order[i]].confidence) {
      if (outcomes[order[j]].is_error) {
        ++group_errors;
      } else {
        ++group_successes;
      }
      ++j;
    }
    u += static_cast<double>(group_successes) *
         (static_cast<double>(errors_below) + 0.5 * static_cast<double>(group_errors));
    errors_below += group_errors;
    i = j;
  }
  return u / (static_cast<double>(counts.successes) * static_cast<double>(counts.errors));
}

double fpr_at_95_tpr(std::span<const ScoredOutcome> outcomes) {
  const Counts counts = validate(outcomes, "fpr_at_95_tpr", true);
  const auto order = rank_order(outcomes, /*ascending=*/false);
  std::size_t successes_ge = 0;
  std::size_t errors_ge = 0;
  std::size_t i = 0;
  // Thresholds descend, so the first tau reaching TPR >= 0.95 is the largest.
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() &&
           outcomes[order[j]].confidence == outcomes[order[i]].confidence) {
      if (outcomes[order[j]].is_error) {
        ++errors_ge;
      } else {
        ++successes_ge;
      }
      ++j;
    }
    const double tpr =
        static_cast<double>(successes_ge) / static_cast<double>(counts.successes);
    if (tpr >= 0.95) {
      return static_cast<double>(errors_ge) / static_cast<double>(counts.errors);
    }
    i = j;
  }
  return 1.0;  // unreachable: tau = min confidence accepts everything
}

std::vector<RiskCoveragePoint> risk_coverage(std::span<const ScoredOutcome> outcomes) {
  const Counts counts = validate(outcomes, "risk_coverage", false);
  const auto order = rank_order(outcomes, /*ascending=*/false);
  const auto n = static_cast<double>(outcomes.size());

  std::vector<RiskCoveragePoint> points;
  std::size_t accepted = 0;
  std::size_t accepted_errors = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() &&
           outcomes[order[j]].confidence == outcomes[order[i]].confidence) {
      if (outcomes[order[j]].is_error) ++accepted_errors;
      ++accepted;
      ++j;
    }
    points.push_back({outcomes[order[i]].confidence, static_cast<double>(accepted) / n,
                      static_cast<double>(accepted_errors) / static_cast<double>(accepted)});
    i = j;
  }
  // Synthetic endpoints: everything accepted below the minimum, nothing
  // above the maximum.
  const double global_risk = static_cast<double>(counts.errors) / n;
  points.push_back({points.back().threshold - 1.0, 1.0, global_risk});
  points.insert(points.begin(), {points.front().threshold + 1.0, 0.0, 0.0});
  std::reverse(points.begin(), points.end());
  return points;
}

std::vector<ScoredOutcome> read_outcomes_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "confidence,is_error") {
    throw FormatError(path.string() + ": expected header 'confidence,is_error', found '" +
                      line + "'");
  }

  std::vector<ScoredOutcome> outcomes;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos) {
      throw FormatError(path.string() + ": line " + std::to_string(line_no) +
                        ": expected 'confidence,is_error'");
    }
    ScoredOutcome outcome;
    try {
      std::size_t used = 0;
      outcome.confidence = std::stod(line.substr(0, comma), &used);
      if (used != comma) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw FormatError(path.string() + ": line " + std::to_string(line_no) +
                        ": bad confidence '" + line.substr(0, comma) + "'");
    }
    if (!std::isfinite(outcome.confidence)) {
      throw FormatError(path.string() + ": line " + std::to_string(line_no) +
                        ": confidence must be finite");
    }
    const std::string flag = line.substr(comma + 1);
    if (flag == "0") {
      outcome.is_error = false;
    } else if (flag == "1") {
      outcome.is_error = true;
    } else {
      throw FormatError(path.string() + ": line " + std::to_string(line_no) +
                        ": is_error must be 0 or 1, found '" + flag + "'");
    }
    outcomes.push_back(outcome);
  }
  return outcomes;
}

void write_outcomes_csv(const std::filesystem::path& path,
                        std::span<const ScoredOutcome> outcomes) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "confidence,is_error\n";
  char buffer[64];
  for (const ScoredOutcome& outcome : outcomes) {
    std::snprintf(buffer, sizeof(buffer), "%.17g,%d\n", outcome.confidence,
                  outcome.is_error ? 1 : 0);
    out << buffer;
  }
  out.close();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace confbench
