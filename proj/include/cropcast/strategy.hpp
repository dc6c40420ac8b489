#ifndef CROPCAST_STRATEGY_HPP
#define CROPCAST_STRATEGY_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "cropcast/catalog.hpp"
#include "cropcast/features.hpp"
#include "cropcast/models.hpp"
#include "cropcast/quality.hpp"

namespace cropcast {

enum class StrategyKind { Continuous, Stability, QualityGated, TrendMarket, TrendCrop, ArBaseline };

std::string_view to_string(StrategyKind kind);
/// Accepts the names printed by to_string ("continuous", "trend_crop", ...).
std::optional<StrategyKind> parse_strategy(std::string_view name);

enum class ModelKind { Mlp, Lstm };

std::string_view to_string(ModelKind kind);
std::optional<ModelKind> parse_model_kind(std::string_view name);

struct StrategyOptions {
    ModelKind model = ModelKind::Mlp;
    TrainConfig train;
    LstmShape lstm_shape;
    std::size_t k = 7;
    std::size_t horizon = 30;
    std::size_t catalog_capacity = ModelCatalog::kDefaultCapacity;
    std::size_t validation_rows = 30;
    Metric selection_metric = Metric::Ar;
    std::size_t gate_window = 7;
    std::size_t gate_missing_run = 2;
    bool gate_on_outliers = true;
    std::size_t trend_window = kTrendWindow;
    std::size_t ar_max_order = 7;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Everything a strategy may look at for one market on one issue day. The
/// frame, report, and supervised set cover days 0..issue only.
struct MarketDay {
    std::string market_id;
    std::string crop_id;
    std::size_t issue = 0;
    Day date = 0;
    const FeatureFrame* frame = nullptr;
    const QualityReport* report = nullptr;
    const SupervisedSet* supervised = nullptr;
};

struct Selection {
    Eigen::VectorXd forecast;  // currency, length horizon
    std::uint64_t version = 0;
    Day trained_through = 0;
    double validation_ar = 0.0;
    double validation_am = 0.0;
    std::optional<TrendPolarity> polarity;
    double trend_score = 0.0;
    std::string action;  // train, skip, fallback, fit
    std::string reason;
    std::optional<std::string> failure;
};

struct DecisionRow {
    Day date = 0;
    std::string action;
    std::string reason;
};

class Strategy {
public:
    explicit Strategy(StrategyOptions options);
    virtual ~Strategy() = default;

    virtual StrategyKind kind() const = 0;
    std::string_view name() const { return to_string(kind()); }

    /// One issue day for every market of the panel, in panel order. A market
    /// whose selection fails gets Selection::failure set.
    std::vector<Selection> step(const std::vector<MarketDay>& day);

    /// Catalog for a market (or the crop) and polarity; null if never created.
    const ModelCatalog* catalog(const std::string& owner, std::optional<TrendPolarity> polarity = {}) const;
    std::size_t catalog_count() const { return catalogs_.size(); }
    /// Every catalog with a printable name: owner, plus "_positive" or
    /// "_negative" for trend catalogs.
    std::vector<std::pair<std::string, const ModelCatalog*>> catalog_list() const;
    std::size_t training_runs() const { return training_runs_; }

    const std::vector<DecisionRow>& decisions(const std::string& market_id) const;

    const StrategyOptions& options() const { return opt_; }

protected:
    virtual void select(const std::vector<MarketDay>& day, std::vector<Selection>& out) = 0;

    using CatalogKey = std::pair<std::string, int>;  // owner, polarity (-1 none)
    ModelCatalog& catalog_for(const std::string& owner, std::optional<TrendPolarity> polarity);

    /// Trains on (standardized inputs, standardized targets) rows and stores
    /// the model in `catalog` with the given validation rows.
    const CatalogEntry& train_and_store(ModelCatalog& catalog, const Eigen::MatrixXd& inputs,
                                        const Eigen::MatrixXd& std_targets, std::uint64_t seed, Day trained_through,
                                        std::map<std::string, Scaler> scalers, std::optional<TrendPolarity> polarity,
                                        const std::vector<const MarketDay*>& validation_days,
                                        const std::vector<std::vector<std::size_t>>& validation_rows);

    Selection use(const CatalogEntry& entry, const MarketDay& day, std::string action, std::string reason) const;
    void log(const MarketDay& day, const std::string& action, const std::string& reason);
    std::uint64_t training_seed(const std::string& owner, std::size_t issue) const;

    StrategyOptions opt_;

private:
    std::map<CatalogKey, ModelCatalog> catalogs_;
    std::map<std::string, std::vector<DecisionRow>> decisions_;
    std::uint64_t next_version_ = 1;
    std::size_t training_runs_ = 0;
};

std::unique_ptr<Strategy> make_strategy(StrategyKind kind, const StrategyOptions& options);

/// Forecast in currency for `day` using a stored model and that market's scaler.
Eigen::VectorXd forecast_with(const CatalogEntry& entry, const MarketDay& day, std::size_t k);

/// Polarity of the trend over prices [i - window + 1, i] (fewer at the start).
TrendLabel window_trend(const Eigen::VectorXd& prices, std::size_t i, std::size_t window);

/// Gate verdict for the last `window` days of the report: empty when open.
std::optional<std::string> gate_reason(const QualityReport& report, std::size_t window, std::size_t missing_run,
                                       bool on_outliers);

}  // namespace cropcast

#endif  // CROPCAST_STRATEGY_HPP
