#ifndef CROPCAST_RUN_HPP
#define CROPCAST_RUN_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cropcast/calendar.hpp"
#include "cropcast/evaluation.hpp"
#include "cropcast/features.hpp"
#include "cropcast/models.hpp"
#include "cropcast/strategy.hpp"
#include "cropcast/synthetic.hpp"

namespace cropcast {

inline constexpr const char* kVersion = "0.1.0";

struct DataSource {
    std::filesystem::path market_csv;
    std::optional<std::filesystem::path> weather_csv;
    /// When unset, the range is taken from the market file.
    std::optional<Day> start_date;
    std::optional<Day> end_date;
    Weekday closed_weekday = Weekday::Sunday;
};

struct RunConfig {
    std::optional<DataSource> data;           // CSV input
    std::optional<SyntheticSpec> synthetic;   // used when `data` is unset
    std::size_t synthetic_markets = 7;
    std::vector<std::string> crops;           // empty selects all
    std::vector<std::string> markets;
    FeatureConfig features;
    TrainConfig train;
    ModelKind model = ModelKind::Mlp;
    std::vector<StrategyKind> strategies{StrategyKind::Continuous};
    std::size_t train_days = 997;
    std::size_t test_days = 128;
    std::filesystem::path output_dir = "cropcast-out";
    std::uint64_t seed = 0;
    std::size_t catalog_capacity = ModelCatalog::kDefaultCapacity;
    std::size_t validation_rows = 30;
    std::size_t gate_window = 7;
    std::size_t gate_missing_run = 2;
    bool gate_on_outliers = true;
    CedMetric ced_metric = CedMetric::Mape;
    bool plots = true;
    bool save_catalogs = false;

    /// Throws ValidationError.
    void validate() const;
};

/// Seeds are derived from the global seed by tag:
///   synthetic data  derive_seed(seed, "synthetic")
///   model training  derive_seed(derive_seed(seed, "models"), "train:<owner>", issue_row)
std::uint64_t synthetic_seed(std::uint64_t global);
/// Seasonal, weather-coupled series with 5% gaps and 2% outliers.
SyntheticSpec demo_synthetic_spec();
std::uint64_t model_seed(std::uint64_t global);

/// Parses the JSON schema documented in the README; unknown keys are errors.
/// Fields absent from the text keep their value in `base`.
RunConfig parse_run_config(const std::string& json_text, RunConfig base = {});
RunConfig load_run_config(const std::filesystem::path& file, RunConfig base = {});
std::string run_config_json(const RunConfig& cfg);

/// Applies a family shorthand: "ag", "ag_wd", or "ag_wd_dq".
void apply_feature_family(FeatureConfig& features, const std::string& family);

/// Series grouped by crop, each group on one shared calendar, filtered by the
/// crop and market selectors.
std::map<std::string, std::vector<AlignedSeries>> load_panels(const RunConfig& cfg);

struct RunOutcome {
    int exit_status = 0;
    std::vector<EvaluationReport> reports;  // summary order
    std::vector<std::string> failures;
};

/// Runs every strategy on every selected series and writes summary.csv, the
/// per-series CSVs and plots, decision logs, and run_manifest.json.
RunOutcome run(const RunConfig& cfg);

}  // namespace cropcast

#endif  // CROPCAST_RUN_HPP
