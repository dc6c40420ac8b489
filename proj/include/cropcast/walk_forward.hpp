#ifndef CROPCAST_WALK_FORWARD_HPP
#define CROPCAST_WALK_FORWARD_HPP

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "cropcast/evaluation.hpp"
#include "cropcast/features.hpp"
#include "cropcast/quality.hpp"
#include "cropcast/series.hpp"
#include "cropcast/strategy.hpp"

namespace cropcast {

struct WalkForwardConfig {
    std::size_t train_days = 997;
    std::size_t test_days = 128;
    FeatureConfig features;
    QualityOptions quality;
    CedMetric ced_metric = CedMetric::Mape;

    void validate() const;
};

struct StrategyResult {
    std::string strategy;
    std::vector<EvaluationReport> reports;  // panel order
    std::size_t catalogs = 0;
    std::size_t training_runs = 0;
};

/// Called after every selection, before the forecast is scored.
using DayObserver = std::function<void(const Strategy&, const MarketDay&, const Selection&)>;

/// Walks issue days train_days-1 .. train_days+test_days-2. On each day every
/// market is re-imputed, re-profiled, and re-featurized from its own prefix,
/// then every strategy selects a model for every market. Truth is the recorded
/// price over the following horizon days; absent positions are ignored.
/// Markets must share one calendar.
std::vector<StrategyResult> rolling_evaluate(const std::vector<AlignedSeries>& panel,
                                             const std::vector<Strategy*>& strategies,
                                             const WalkForwardConfig& cfg, const DayObserver& observer = {});

/// Single series, single strategy.
EvaluationReport rolling_evaluate(const AlignedSeries& series, Strategy& strategy, const WalkForwardConfig& cfg);

}  // namespace cropcast

#endif  // CROPCAST_WALK_FORWARD_HPP
