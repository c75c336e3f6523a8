#include "confbench/plots.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "confbench/errors.hpp"
#include "vendor/json.hpp"

namespace confbench {

namespace {

std::string fmt(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

std::string coord(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.2f", value);
  return buffer;
}

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kMarginLeft = 60.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 50.0;

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b"};

struct Frame {
  double x_min, x_max, y_min, y_max;

  double sx(double x) const {
    const double span = x_max - x_min;
    const double t = span > 0.0 ? (x - x_min) / span : 0.5;
    return kMarginLeft + t * (kWidth - kMarginLeft - kMarginRight);
  }
  double sy(double y) const {
    const double span = y_max - y_min;
    const double t = span > 0.0 ? (y - y_min) / span : 0.5;
    return kHeight - kMarginBottom - t * (kHeight - kMarginTop - kMarginBottom);
  }
};

void open_svg(std::ostringstream& out, const std::string& title) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n"
      << "  <rect width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n"
      << "  <text x=\"" << coord(kWidth / 2) << "\" y=\"24\" font-family=\"sans-serif\""
      << " font-size=\"16\" text-anchor=\"middle\">" << title << "</text>\n";
}

void draw_axes(std::ostringstream& out, const Frame& frame, const std::string& x_label,
               const std::string& y_label) {
  const double x0 = frame.sx(frame.x_min);
  const double x1 = frame.sx(frame.x_max);
  const double y0 = frame.sy(frame.y_min);
  const double y1 = frame.sy(frame.y_max);
  out << "  <line x1=\"" << coord(x0) << "\" y1=\"" << coord(y0) << "\" x2=\"" << coord(x1)
      << "\" y2=\"" << coord(y0) << "\" stroke=\"black\"/>\n"
      << "  <line x1=\"" << coord(x0) << "\" y1=\"" << coord(y0) << "\" x2=\"" << coord(x0)
      << "\" y2=\"" << coord(y1) << "\" stroke=\"black\"/>\n"
      << "  <text x=\"" << coord((x0 + x1) / 2) << "\" y=\"" << coord(kHeight - 12)
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" << x_label
      << "</text>\n"
      << "  <text x=\"16\" y=\"" << coord((y0 + y1) / 2)
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\""
      << " transform=\"rotate(-90 16 " << coord((y0 + y1) / 2) << ")\">" << y_label
      << "</text>\n";
  // Min/max tick labels keep scale readable without a full tick generator.
  out << "  <text x=\"" << coord(x0) << "\" y=\"" << coord(y0 + 16)
      << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">"
      << coord(frame.x_min) << "</text>\n"
      << "  <text x=\"" << coord(x1) << "\" y=\"" << coord(y0 + 16)
      << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">"
      << coord(frame.x_max) << "</text>\n"
      << "  <text x=\"" << coord(x0 - 6) << "\" y=\"" << coord(y1 + 4)
      << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">"
      << coord(frame.y_max) << "</text>\n"
      << "  <text x=\"" << coord(x0 - 6) << "\" y=\"" << coord(y0 + 4)
      << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">"
      << coord(frame.y_min) << "</text>\n";
}

void write_text_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << body;
  out.close();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

std::vector<HistogramBin> confidence_histogram(std::span<const ScoredOutcome> outcomes,
                                               int bins) {
  if (bins < 1) throw ConfigError("histogram bins must be >= 1");
  if (outcomes.empty()) throw MetricError("histogram of empty outcome set");

  double lo = outcomes.front().confidence;
  double hi = lo;
  std::size_t errors = 0;
  for (const ScoredOutcome& o : outcomes) {
    lo = std::min(lo, o.confidence);
    hi = std::max(hi, o.confidence);
    errors += o.is_error ? 1 : 0;
  }
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const std::size_t successes = outcomes.size() - errors;

  std::vector<HistogramBin> result(static_cast<std::size_t>(bins));
  const double width = (hi - lo) / bins;
  for (int b = 0; b < bins; ++b) {
    result[b].lo = lo + b * width;
    result[b].hi = lo + (b + 1) * width;
  }
  for (const ScoredOutcome& o : outcomes) {
    int b = static_cast<int>((o.confidence - lo) / width);
    b = std::clamp(b, 0, bins - 1);
    if (o.is_error) {
      result[b].error_density += 1.0;
    } else {
      result[b].success_density += 1.0;
    }
  }
  for (HistogramBin& bin : result) {
    if (successes > 0) bin.success_density /= static_cast<double>(successes);
    if (errors > 0) bin.error_density /= static_cast<double>(errors);
  }
  return result;
}

void write_histogram_csv(const std::filesystem::path& path,
                         std::span<const HistogramBin> bins) {
  std::ostringstream out;
  out << "bin_lo,bin_hi,class,density\n";
  for (const HistogramBin& bin : bins) {
    out << fmt(bin.lo) << "," << fmt(bin.hi) << ",success," << fmt(bin.success_density)
        << "\n";
  }
  for (const HistogramBin& bin : bins) {
    out << fmt(bin.lo) << "," << fmt(bin.hi) << ",error," << fmt(bin.error_density) << "\n";
  }
  write_text_file(path, out.str());
}

std::string histogram_svg(std::span<const HistogramBin> bins, const std::string& title) {
  if (bins.empty()) throw MetricError("histogram SVG needs at least one bin");
  double peak = 0.0;
  for (const HistogramBin& bin : bins) {
    peak = std::max({peak, bin.success_density, bin.error_density});
  }
  if (peak <= 0.0) peak = 1.0;
  const Frame frame{bins.front().lo, bins.back().hi, 0.0, peak};

  std::ostringstream out;
  open_svg(out, title);
  draw_axes(out, frame, "confidence", "relative density");
  const double base = frame.sy(0.0);
  for (const HistogramBin& bin : bins) {
    const double x0 = frame.sx(bin.lo);
    const double x1 = frame.sx(bin.hi);
    const double half = (x1 - x0) / 2.0;
    const double ys = frame.sy(bin.success_density);
    const double ye = frame.sy(bin.error_density);
    out << "  <rect x=\"" << coord(x0) << "\" y=\"" << coord(ys) << "\" width=\""
        << coord(half) << "\" height=\"" << coord(base - ys)
        << "\" fill=\"#2ca02c\" fill-opacity=\"0.7\"/>\n"
        << "  <rect x=\"" << coord(x0 + half) << "\" y=\"" << coord(ye) << "\" width=\""
        << coord(half) << "\" height=\"" << coord(base - ye)
        << "\" fill=\"#d62728\" fill-opacity=\"0.7\"/>\n";
  }
  out << "  <rect x=\"" << coord(kWidth - 170) << "\" y=\"40\" width=\"12\" height=\"12\""
      << " fill=\"#2ca02c\"/>\n"
      << "  <text x=\"" << coord(kWidth - 152)
      << "\" y=\"51\" font-family=\"sans-serif\" font-size=\"12\">correct</text>\n"
      << "  <rect x=\"" << coord(kWidth - 170) << "\" y=\"58\" width=\"12\" height=\"12\""
      << " fill=\"#d62728\"/>\n"
      << "  <text x=\"" << coord(kWidth - 152)
      << "\" y=\"69\" font-family=\"sans-serif\" font-size=\"12\">incorrect</text>\n"
      << "</svg>\n";
  return out.str();
}

void write_risk_coverage_csv(const std::filesystem::path& path,
                             std::span<const RiskCoveragePoint> points) {
  std::ostringstream out;
  out << "threshold,coverage,selective_risk\n";
  for (const RiskCoveragePoint& point : points) {
    out << fmt(point.threshold) << "," << fmt(point.coverage) << ","
        << fmt(point.selective_risk) << "\n";
  }
  write_text_file(path, out.str());
}

std::string risk_coverage_svg(
    const std::vector<std::pair<std::string, std::vector<RiskCoveragePoint>>>& series) {
  if (series.empty()) throw MetricError("risk-coverage SVG needs at least one series");
  double risk_max = 0.0;
  for (const auto& [name, points] : series) {
    for (const RiskCoveragePoint& point : points) {
      risk_max = std::max(risk_max, point.selective_risk);
    }
  }
  if (risk_max <= 0.0) risk_max = 1.0;
  const Frame frame{0.0, 1.0, 0.0, risk_max};

  std::ostringstream out;
  open_svg(out, "risk-coverage");
  draw_axes(out, frame, "coverage", "selective risk");
  std::size_t color = 0;
  for (const auto& [name, points] : series) {
    out << "  <polyline fill=\"none\" stroke=\"" << kPalette[color % 6]
        << "\" stroke-width=\"1.5\" points=\"";
    for (const RiskCoveragePoint& point : points) {
      out << coord(frame.sx(point.coverage)) << "," << coord(frame.sy(point.selective_risk))
          << " ";
    }
    out << "\"/>\n";
    const double ly = 44.0 + 16.0 * static_cast<double>(color);
    out << "  <line x1=\"" << coord(kWidth - 170) << "\" y1=\"" << coord(ly) << "\" x2=\""
        << coord(kWidth - 150) << "\" y2=\"" << coord(ly) << "\" stroke=\""
        << kPalette[color % 6] << "\" stroke-width=\"1.5\"/>\n"
        << "  <text x=\"" << coord(kWidth - 144) << "\" y=\"" << coord(ly + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << name << "</text>\n";
    ++color;
  }
  out << "</svg>\n";
  return out.str();
}

std::vector<std::filesystem::path> run_plot(const std::filesystem::path& report_path) {
  if (!std::filesystem::exists(report_path)) {
    throw DependencyError("missing report " + report_path.string() +
                          "; run `confbench eval` first");
  }
  std::ifstream in(report_path);
  if (!in) throw IoError("cannot open " + report_path.string());
  nlohmann::json report;
  try {
    report = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& err) {
    throw FormatError(report_path.string() + ": " + err.what());
  }
  if (!report.contains("methods") || !report["methods"].is_array()) {
    throw FormatError(report_path.string() + ": missing methods array");
  }

  const std::filesystem::path dir = report_path.parent_path();
  std::vector<std::filesystem::path> artifacts;
  std::vector<std::pair<std::string, std::vector<RiskCoveragePoint>>> rc_series;

  for (const auto& method : report["methods"]) {
    const std::string name = method.at("name").get<std::string>();

    const std::filesystem::path outcomes_path = dir / ("outcomes_" + name + ".csv");
    if (!std::filesystem::exists(outcomes_path)) {
      throw DependencyError("missing outcomes CSV " + outcomes_path.string() +
                            "; run `confbench eval` first");
    }
    const std::vector<ScoredOutcome> outcomes = read_outcomes_csv(outcomes_path);
    const std::vector<HistogramBin> bins = confidence_histogram(outcomes);

    const std::filesystem::path hist_csv = dir / ("hist_" + name + ".csv");
    write_histogram_csv(hist_csv, bins);
    artifacts.push_back(hist_csv);

    const std::filesystem::path hist_svg = dir / ("hist_" + name + ".svg");
    write_text_file(hist_svg, histogram_svg(bins, name));
    artifacts.push_back(hist_svg);

    std::vector<RiskCoveragePoint> points;
    for (const auto& entry : method.at("risk_coverage")) {
      points.push_back({entry.at("threshold").get<double>(),
                        entry.at("coverage").get<double>(),
                        entry.at("selective_risk").get<double>()});
    }
    const std::filesystem::path rc_csv = dir / ("rc_" + name + ".csv");
    write_risk_coverage_csv(rc_csv, points);
    artifacts.push_back(rc_csv);
    rc_series.emplace_back(name, std::move(points));
  }

  const std::filesystem::path rc_svg = dir / "rc_curves.svg";
  write_text_file(rc_svg, risk_coverage_svg(rc_series));
  artifacts.push_back(rc_svg);
  return artifacts;
}

}  // namespace confbench
