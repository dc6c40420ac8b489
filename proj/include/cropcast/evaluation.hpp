#ifndef CROPCAST_EVALUATION_HPP
#define CROPCAST_EVALUATION_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cropcast/calendar.hpp"
#include "cropcast/stats.hpp"

namespace cropcast {

/// Errors of one forecast over the positions where truth is present.
/// Zero truth values count for RMSE but are skipped by MAPE.
struct ForecastMetrics {
    double rmse = 0.0;
    double mape = 0.0;                // percent
    std::size_t positions = 0;        // truth present
    std::size_t mape_positions = 0;   // truth present and non-zero
    std::size_t zero_truth = 0;

    bool evaluable() const { return positions > 0; }
    bool mape_evaluable() const { return mape_positions > 0; }
};

/// `truth` uses NaN for absent values. Throws ShapeError on a length mismatch.
ForecastMetrics forecast_metrics(const Eigen::Ref<const Eigen::VectorXd>& pred,
                                 const Eigen::Ref<const Eigen::VectorXd>& truth);

struct ForecastRecord {
    Day issue_date = 0;
    std::size_t issue_row = 0;
    Eigen::VectorXd forecast;
    Eigen::VectorXd truth;
    ForecastMetrics metrics;
    std::uint64_t model_version = 0;
    Day trained_through = 0;
    std::optional<TrendPolarity> polarity;
    std::string action;
    std::optional<std::string> failure;

    bool evaluable() const { return !failure && metrics.evaluable(); }
};

struct CedPoint {
    double threshold = 0.0;
    double fraction = 0.0;
};

/// Empirical CDF on a 0..max(errors) grid of `steps` intervals, plus the left
/// and right limits at every distinct error value. Throws InsufficientDataError
/// on an empty input.
std::vector<CedPoint> ced_curve(const std::vector<double>& errors, std::size_t steps = 100);

/// Trapezoidal area between the curve and fraction 1.
double aoc(const std::vector<CedPoint>& curve);

enum class CedMetric { Mape, Rmse };

struct EvaluationReport {
    std::string strategy;
    std::string market_id;
    std::vector<ForecastRecord> records;
    double ar = 0.0;
    double am = 0.0;
    std::size_t ar_days = 0;  // effective p for AR
    std::size_t am_days = 0;  // effective p for AM
    std::size_t failed_days = 0;
    std::vector<CedPoint> ced;
    double aoc = 0.0;
};

/// Aggregates AR and AM over evaluable records; unevaluable and failed days
/// shrink p. AR/AM are NaN when nothing was evaluable.
EvaluationReport summarize(std::string strategy, std::string market_id, std::vector<ForecastRecord> records,
                           CedMetric ced_metric = CedMetric::Mape);

}  // namespace cropcast

#endif  // CROPCAST_EVALUATION_HPP
