#ifndef CROPCAST_REPORTS_HPP
#define CROPCAST_REPORTS_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "cropcast/evaluation.hpp"
#include "cropcast/features.hpp"
#include "cropcast/quality.hpp"
#include "cropcast/stats.hpp"
#include "cropcast/strategy.hpp"
#include "cropcast/walk_forward.hpp"

namespace cropcast {

/// Quotes a CSV field when it contains a comma, quote, or line break.
std::string csv_field(const std::string& s);

/// Fixed six-decimal rendering; NaN becomes an empty field.
std::string fixed(double v);

void write_errors_csv(const std::filesystem::path& file, const EvaluationReport& report);
void write_ced_csv(const std::filesystem::path& file, const std::vector<CedPoint>& curve);
/// `strategy,market,ar,am,aoc`, strategies outermost.
void write_summary_csv(const std::filesystem::path& file, const std::vector<EvaluationReport>& reports);
void write_decisions_csv(const std::filesystem::path& file, const std::string& strategy,
                         const std::vector<DecisionRow>& rows);

struct QualityRow {
    std::string market_id;
    std::string crop_id;
    QualityReport report;
};
void write_quality_csv(const std::filesystem::path& file, const std::vector<QualityRow>& rows);

struct StatsRow {
    std::string market_id;
    std::string crop_id;
    StationarityResult stationarity;
    ResidualStats residual;
};
void write_stats_csv(const std::filesystem::path& file, const std::vector<StatsRow>& rows);

/// `date` followed by the frame's standardized columns.
void write_frame_csv(const std::filesystem::path& file, const FeatureFrame& frame, bool raw = false);

struct PlotLine {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// Minimal self-contained SVG line chart.
void write_line_svg(const std::filesystem::path& file, const std::string& title, const std::string& x_label,
                    const std::string& y_label, const std::vector<PlotLine>& lines);

}  // namespace cropcast

#endif  // CROPCAST_REPORTS_HPP
