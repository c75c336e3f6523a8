#ifndef CONFBENCH_PLOTS_HPP
#define CONFBENCH_PLOTS_HPP

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "confbench/metrics.hpp"

namespace confbench {

/// One histogram bin with per-class relative densities. Densities are
/// normalized within each class (each class's densities sum to 1), matching
/// the "relative density" convention so that rare errors stay visible next
/// to abundant successes.
struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  double success_density = 0.0;
  double error_density = 0.0;
};

/// Bins confidences over [min, max] of the observed scores. Degenerate
/// ranges are widened symmetrically so every sample lands in a bin.
std::vector<HistogramBin> confidence_histogram(std::span<const ScoredOutcome> outcomes,
                                               int bins = 20);

/// CSV with one row per (bin, class): bin_lo,bin_hi,class,density.
void write_histogram_csv(const std::filesystem::path& path,
                         std::span<const HistogramBin> bins);

/// Standalone SVG document for one method's confidence densities.
std::string histogram_svg(std::span<const HistogramBin> bins, const std::string& title);

/// CSV with one row per curve point: threshold,coverage,selective_risk.
void write_risk_coverage_csv(const std::filesystem::path& path,
                             std::span<const RiskCoveragePoint> points);

/// One risk-coverage polyline per named method, shared axes.
std::string risk_coverage_svg(
    const std::vector<std::pair<std::string, std::vector<RiskCoveragePoint>>>& series);

/// Reads `report.json` and the sibling `outcomes_<method>.csv` files produced
/// by eval, then emits per-method histogram CSV/SVG pairs, per-method
/// risk-coverage CSVs, and a combined `rc_curves.svg`. Returns the artifact
/// paths in emission order. Missing inputs raise DependencyError.
std::vector<std::filesystem::path> run_plot(const std::filesystem::path& report_path);

}  // namespace confbench

#endif  // CONFBENCH_PLOTS_HPP
