// cropcast: walk-forward crop-price forecasting from the command line.

#include <cstdlib>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cropcast/error.hpp"
#include "cropcast/quality.hpp"
#include "cropcast/reports.hpp"
#include "cropcast/run.hpp"
#include "cropcast/stats.hpp"

using namespace cropcast;

namespace {

struct Flags {
    std::string config;
    std::string output;
    std::optional<std::uint64_t> seed;
    std::string strategies;
    std::string preset;
    std::string family;
    std::string model;
    std::optional<std::size_t> train_days;
    std::optional<std::size_t> test_days;
    std::string market_csv;
    std::string weather_csv;
    bool synthetic = false;
    std::optional<std::size_t> markets;
};

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("-c,--config", f.config, "JSON run configuration");
    cmd->add_option("-o,--output", f.output, "output directory (overrides CROPCAST_OUTPUT_DIR and the config)");
    cmd->add_option("--seed", f.seed, "global seed");
    cmd->add_option("--market-csv", f.market_csv, "market price CSV");
    cmd->add_option("--weather-csv", f.weather_csv, "weather CSV");
    cmd->add_flag("--synthetic", f.synthetic, "use the built-in synthetic panel when no data is configured");
    cmd->add_option("--markets", f.markets, "number of synthetic markets");
}

void add_model_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--strategies", f.strategies,
                    "comma list: continuous,stability,quality_gated,trend_market,trend_crop,ar_baseline");
    cmd->add_option("--preset", f.preset, "feature preset: default or paper13");
    cmd->add_option("--features", f.family, "feature families: ag, ag_wd, ag_wd_dq");
    cmd->add_option("--model", f.model, "mlp or lstm");
    cmd->add_option("--train-days", f.train_days, "days before the first issue date (inclusive)");
    cmd->add_option("--test-days", f.test_days, "number of issue dates");
}

RunConfig resolve(const Flags& f) {
    RunConfig cfg;
    if (!f.config.empty()) cfg = load_run_config(f.config, cfg);
    if (const char* env = std::getenv("CROPCAST_OUTPUT_DIR"); env != nullptr && *env != '\0') cfg.output_dir = env;
    if (!f.output.empty()) cfg.output_dir = f.output;
    if (f.seed) cfg.seed = *f.seed;
    if (!f.market_csv.empty()) {
        DataSource d = cfg.data.value_or(DataSource{});
        d.market_csv = f.market_csv;
        cfg.data = d;
    }
    if (!f.weather_csv.empty()) {
        if (!cfg.data) throw ValidationError("--weather-csv needs a market CSV");
        cfg.data->weather_csv = f.weather_csv;
    }
    if (f.synthetic && !cfg.synthetic) cfg.synthetic = demo_synthetic_spec();
    if (f.markets) cfg.synthetic_markets = *f.markets;
    if (!f.preset.empty()) {
        if (f.preset == "paper13") {
            const FeatureConfig p = FeatureConfig::paper13();
            cfg.features.include_month = p.include_month;
        } else if (f.preset != "default") {
            throw ValidationError("unknown preset '" + f.preset + "'");
        }
    }
    if (!f.family.empty()) apply_feature_family(cfg.features, f.family);
    if (!f.model.empty()) {
        const auto m = parse_model_kind(f.model);
        if (!m) throw ValidationError("unknown model '" + f.model + "'");
        cfg.model = *m;
    }
    if (!f.strategies.empty()) {
        cfg.strategies.clear();
        std::stringstream ss(f.strategies);
        std::string name;
        while (std::getline(ss, name, ',')) {
            const auto s = parse_strategy(name);
            if (!s) throw ValidationError("unknown strategy '" + name + "'");
            cfg.strategies.push_back(*s);
        }
    }
    if (f.train_days) cfg.train_days = *f.train_days;
    if (f.test_days) cfg.test_days = *f.test_days;
    if (!cfg.data && !cfg.synthetic) {
        throw ValidationError("no data: pass --config, --market-csv, or --synthetic");
    }
    return cfg;
}

int cmd_synth(const RunConfig& cfg) {
    if (!cfg.synthetic) throw ValidationError("synth needs a synthetic spec (--synthetic or a config)");
    const auto panels = load_panels(cfg);
    SeriesCollection markets;
    WeatherCollection weather;
    for (const auto& [crop, group] : panels) {
        for (const AlignedSeries& s : group) {
            markets.emplace(SeriesKey{s.market_id, s.crop_id}, s);
            weather.emplace(s.market_id, s);
        }
    }
    std::filesystem::create_directories(cfg.output_dir);
    write_market_csv(cfg.output_dir / "market.csv", markets);
    write_weather_csv(cfg.output_dir / "weather.csv", weather);
    std::cout << "wrote " << markets.size() << " series to " << (cfg.output_dir / "market.csv").string() << " and "
              << (cfg.output_dir / "weather.csv").string() << '\n';
    return 0;
}

int cmd_ingest(const RunConfig& cfg) {
    std::cout << "crop_id,market_id,start,end,days,absent_price,absent_arrival,absent_weather\n";
    for (const auto& [crop, group] : load_panels(cfg)) {
        for (const AlignedSeries& s : group) {
            const auto absent = [](const Eigen::VectorXd& v) { return absent_mask(v).count(); };
            std::cout << csv_field(crop) << ',' << csv_field(s.market_id) << ','
                      << (s.calendar.empty() ? "" : format_date(s.calendar[0])) << ','
                      << (s.calendar.empty() ? "" : format_date(s.calendar[s.calendar.size() - 1])) << ','
                      << s.calendar.size() << ',' << absent(s.price) << ',' << absent(s.arrival) << ','
                      << absent(s.temp) << '\n';
        }
    }
    return 0;
}

int cmd_quality(const RunConfig& cfg) {
    std::vector<QualityRow> rows;
    for (const auto& [crop, group] : load_panels(cfg)) {
        for (const AlignedSeries& s : group) rows.push_back({s.market_id, crop, quality_report(s)});
    }
    const auto file = cfg.output_dir / "quality.csv";
    write_quality_csv(file, rows);
    std::cout << "wrote " << file.string() << '\n';
    int status = 0;
    for (const QualityRow& r : rows) {
        if (r.report.outlier_error) {
            std::cerr << r.market_id << ": outlier stage skipped: " << *r.report.outlier_error << '\n';
            status = 1;
        }
    }
    return status;
}

int cmd_stats(const RunConfig& cfg, std::size_t period) {
    std::vector<StatsRow> rows;
    int status = 0;
    for (const auto& [crop, group] : load_panels(cfg)) {
        for (const AlignedSeries& s : group) {
            try {
                const QualityReport q = quality_report(s);
                const AlignedSeries imputed = impute_spline(s, q.missing_mask);
                StatsRow row{s.market_id, crop, stationarity(imputed.price), {}};
                row.residual = residual_stats(seasonal_decompose(imputed.price, period));
                rows.push_back(std::move(row));
            } catch (const Error& e) {
                std::cerr << s.market_id << ": " << e.what() << '\n';
                status = 1;
            }
        }
    }
    const auto file = cfg.output_dir / "stats.csv";
    write_stats_csv(file, rows);
    std::cout << "wrote " << file.string() << '\n';
    return status;
}

int cmd_features(const RunConfig& cfg, const std::string& market, bool raw) {
    for (const auto& [crop, group] : load_panels(cfg)) {
        for (const AlignedSeries& s : group) {
            if (!market.empty() && s.market_id != market) continue;
            const QualityReport q = quality_report(s);
            const AlignedSeries imputed = impute_spline(s, q.missing_mask);
            const FeatureFrame frame = build_feature_frame(imputed, q, cfg.features);
            const auto file = cfg.output_dir / ("features_" + crop + "_" + s.market_id + ".csv");
            write_frame_csv(file, frame, raw);
            std::cout << "wrote " << file.string() << '\n';
        }
    }
    return 0;
}

int cmd_backtest(const RunConfig& cfg) {
    const RunOutcome outcome = run(cfg);
    std::cout << "strategy,market,ar,am,aoc\n";
    for (const EvaluationReport& r : outcome.reports) {
        std::cout << r.strategy << ',' << r.market_id << ',' << fixed(r.ar) << ',' << fixed(r.am) << ','
                  << fixed(r.aoc) << '\n';
    }
    for (const std::string& f : outcome.failures) std::cerr << "failed: " << f << '\n';
    std::cout << "artifacts in " << cfg.output_dir.string() << '\n';
    return outcome.exit_status;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Walk-forward crop-price forecasting"};
    app.require_subcommand(1);
    Flags f;

    auto* synth = app.add_subcommand("synth", "write a seeded synthetic market and weather panel as CSV");
    add_common(synth, f);
    auto* ingest = app.add_subcommand("ingest", "load and align CSV data, print per-series coverage");
    add_common(ingest, f);
    auto* quality = app.add_subcommand("quality", "missing/outlier report per series");
    add_common(quality, f);
    auto* stats = app.add_subcommand("stats", "ADF/KPSS classification and residual statistics");
    add_common(stats, f);
    std::size_t period = kDefaultDecompositionPeriod;
    stats->add_option("--period", period, "decomposition period in trading days");
    auto* features = app.add_subcommand("features", "dump the feature frame of each series");
    add_common(features, f);
    add_model_flags(features, f);
    std::string market;
    bool raw = false;
    features->add_option("--market", market, "only this market");
    features->add_flag("--raw", raw, "unstandardized values");
    auto* backtest = app.add_subcommand("backtest", "walk-forward evaluation of the selected strategies");
    add_common(backtest, f);
    add_model_flags(backtest, f);

    CLI11_PARSE(app, argc, argv);
    try {
        const RunConfig cfg = resolve(f);
        if (synth->parsed()) return cmd_synth(cfg);
        if (ingest->parsed()) return cmd_ingest(cfg);
        if (quality->parsed()) return cmd_quality(cfg);
        if (stats->parsed()) return cmd_stats(cfg, period);
        if (features->parsed()) return cmd_features(cfg, market, raw);
        if (backtest->parsed()) return cmd_backtest(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
