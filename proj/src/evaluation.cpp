#include "cropcast/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cropcast/error.hpp"
#include "cropcast/series.hpp"

namespace cropcast {

ForecastMetrics forecast_metrics(const Eigen::Ref<const Eigen::VectorXd>& pred,
                                 const Eigen::Ref<const Eigen::VectorXd>& truth) {
    if (pred.size() != truth.size()) {
        throw ShapeError("forecast of length " + std::to_string(pred.size()) + " against truth of length " +
                         std::to_string(truth.size()));
    }
    ForecastMetrics m;
    double sq = 0.0;
    double pct = 0.0;
    for (Eigen::Index j = 0; j < pred.size(); ++j) {
        const double y = truth[j];
        if (is_absent(y)) continue;
        const double e = y - pred[j];
        sq += e * e;
        ++m.positions;
        if (y == 0.0) {
            ++m.zero_truth;
            continue;
        }
        pct += 100.0 * std::abs(e) / std::abs(y);
        ++m.mape_positions;
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    m.rmse = m.positions > 0 ? std::sqrt(sq / static_cast<double>(m.positions)) : nan;
    m.mape = m.mape_positions > 0 ? pct / static_cast<double>(m.mape_positions) : nan;
    return m;
}

std::vector<CedPoint> ced_curve(const std::vector<double>& errors, std::size_t steps) {
    if (errors.empty()) throw InsufficientDataError("CED curve needs at least one error");
    if (steps < 1) throw DomainError("CED grid needs at least one step");
    std::vector<double> e = errors;
    for (double v : e) {
        if (!std::isfinite(v) || v < 0.0) throw DomainError("CED errors must be finite and non-negative");
    }
    std::sort(e.begin(), e.end());
    const double n = static_cast<double>(e.size());
    const double top = e.back();
    auto below = [&](double t) {  // fraction strictly below t
        return static_cast<double>(std::lower_bound(e.begin(), e.end(), t) - e.begin()) / n;
    };
    auto at_most = [&](double t) {
        return static_cast<double>(std::upper_bound(e.begin(), e.end(), t) - e.begin()) / n;
    };

    std::vector<double> grid;
    grid.reserve(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) {
        grid.push_back(top * static_cast<double>(i) / static_cast<double>(steps));
    }
    std::vector<CedPoint> out;
    std::size_t g = 0;
    auto next = e.begin();
    while (g < grid.size() || next != e.end()) {
        const bool take_error = next != e.end() && (g == grid.size() || *next <= grid[g]);
        if (take_error) {
            const double t = *next;
            out.push_back({t, below(t)});
            out.push_back({t, at_most(t)});
            next = std::upper_bound(next, e.end(), t);
            if (g < grid.size() && grid[g] == t) ++g;
        } else {
            out.push_back({grid[g], at_most(grid[g])});
            ++g;
        }
    }
    return out;
}

double aoc(const std::vector<CedPoint>& curve) {
    double area = 0.0;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        const double w = curve[i].threshold - curve[i - 1].threshold;
        area += w * (2.0 - curve[i].fraction - curve[i - 1].fraction) / 2.0;
    }
    return area;
}

EvaluationReport summarize(std::string strategy, std::string market_id, std::vector<ForecastRecord> records,
                           CedMetric ced_metric) {
    EvaluationReport r;
    r.strategy = std::move(strategy);
    r.market_id = std::move(market_id);
    r.records = std::move(records);
    double ar = 0.0;
    double am = 0.0;
    std::vector<double> ced_errors;
    for (const ForecastRecord& rec : r.records) {
        if (rec.failure) {
            ++r.failed_days;
            continue;
        }
        if (rec.metrics.evaluable()) {
            ar += rec.metrics.rmse;
            ++r.ar_days;
            if (ced_metric == CedMetric::Rmse) ced_errors.push_back(rec.metrics.rmse);
        }
        if (rec.metrics.mape_evaluable()) {
            am += rec.metrics.mape;
            ++r.am_days;
            if (ced_metric == CedMetric::Mape) ced_errors.push_back(rec.metrics.mape);
        }
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.ar = r.ar_days > 0 ? ar / static_cast<double>(r.ar_days) : nan;
    r.am = r.am_days > 0 ? am / static_cast<double>(r.am_days) : nan;
    if (!ced_errors.empty()) {
        r.ced = ced_curve(ced_errors);
        r.aoc = aoc(r.ced);
    } else {
        r.aoc = nan;
    }
    return r;
}

}  // namespace cropcast
