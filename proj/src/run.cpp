#include "cropcast/run.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cropcast/error.hpp"
#include "cropcast/reports.hpp"
#include "cropcast/rng.hpp"
#include "cropcast/walk_forward.hpp"

namespace cropcast {

using nlohmann::json;

void RunConfig::validate() const {
    features.validate();
    train.validate();
    if (strategies.empty()) throw ValidationError("at least one strategy is required");
    if (train_days < 1) throw ValidationError("train_days must be >= 1");
    if (test_days < 1) throw ValidationError("test_days must be >= 1");
    if (!data && !synthetic) throw ValidationError("either a data source or a synthetic spec is required");
    if (synthetic) {
        cropcast::validate(*synthetic);
        if (synthetic_markets < 1) throw ValidationError("synthetic markets must be >= 1");
        if (train_days + test_days > synthetic->n_days) {
            throw ValidationError("train_days + test_days = " + std::to_string(train_days + test_days) +
                                  " exceeds the " + std::to_string(synthetic->n_days) + " synthetic days");
        }
    }
    if (catalog_capacity < 1) throw ValidationError("catalog capacity must be >= 1");
    if (validation_rows < 1) throw ValidationError("validation rows must be >= 1");
    if (gate_window < 1 || gate_missing_run < 1) throw ValidationError("gate window and run must be >= 1");
    if (output_dir.empty()) throw ValidationError("output directory is empty");
}

std::uint64_t synthetic_seed(std::uint64_t global) { return derive_seed(global, "synthetic"); }
std::uint64_t model_seed(std::uint64_t global) { return derive_seed(global, "models"); }

SyntheticSpec demo_synthetic_spec() {
    SyntheticSpec s;
    s.trend_slope = 0.1;
    s.seasonal_amplitude = 400.0;
    s.seasonal_period = 310.0;
    s.noise_std = 40.0;
    s.ar1_coeff = 0.7;
    s.weather_coupling = 250.0;
    s.weather_persistence = 0.5;
    s.missing_rate = 0.05;
    s.outlier_rate = 0.02;
    return s;
}

void apply_feature_family(FeatureConfig& features, const std::string& family) {
    if (family == "ag") {
        features.include_weather = false;
        features.include_quality = false;
    } else if (family == "ag_wd") {
        features.include_weather = true;
        features.include_quality = false;
    } else if (family == "ag_wd_dq") {
        features.include_weather = true;
        features.include_quality = true;
    } else {
        throw ValidationError("unknown feature family '" + family + "' (ag, ag_wd, ag_wd_dq)");
    }
}

namespace {

// ---------------------------------------------------------------- JSON

template <typename T>
T as(const json& v, const std::string& key) {
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        throw ValidationError("config key '" + key + "' has the wrong type");
    }
}

Day as_date(const json& v, const std::string& key) {
    const auto d = parse_date(as<std::string>(v, key));
    if (!d) throw ValidationError("config key '" + key + "' is not a YYYY-MM-DD date");
    return *d;
}

void unknown(const std::string& where, const std::string& key) {
    throw ValidationError("unknown config key '" + where + key + "'");
}

void read_features(const json& j, FeatureConfig& f) {
    if (!j.is_object()) throw ValidationError("config 'features' must be an object");
    if (j.contains("preset")) {
        const auto p = as<std::string>(j["preset"], "features.preset");
        if (p == "paper13") f = FeatureConfig::paper13();
        else if (p == "default") f = FeatureConfig{};
        else throw ValidationError("unknown feature preset '" + p + "'");
    }
    for (const auto& [k, v] : j.items()) {
        const std::string key = "features." + k;
        if (k == "preset") continue;
        else if (k == "family") apply_feature_family(f, as<std::string>(v, key));
        else if (k == "k") f.k = as<std::size_t>(v, key);
        else if (k == "horizon") f.horizon = as<std::size_t>(v, key);
        else if (k == "fft_retained") f.fft_retained = as<std::vector<std::size_t>>(v, key);
        else if (k == "sma_windows") f.sma_windows = as<std::vector<std::size_t>>(v, key);
        else if (k == "ema_coms") f.ema_coms = as<std::vector<double>>(v, key);
        else if (k == "mstd_window") f.mstd_window = as<std::size_t>(v, key);
        else if (k == "macd_fast") f.macd_fast = as<std::size_t>(v, key);
        else if (k == "macd_slow") f.macd_slow = as<std::size_t>(v, key);
        else if (k == "include_day") f.include_day = as<bool>(v, key);
        else if (k == "include_month") f.include_month = as<bool>(v, key);
        else if (k == "standardize") f.standardize = as<bool>(v, key);
        else if (k == "include_weather") f.include_weather = as<bool>(v, key);
        else if (k == "include_quality") f.include_quality = as<bool>(v, key);
        else unknown("features.", k);
    }
}

void read_train(const json& j, TrainConfig& t) {
    if (!j.is_object()) throw ValidationError("config 'train' must be an object");
    for (const auto& [k, v] : j.items()) {
        const std::string key = "train." + k;
        if (k == "solver") {
            const auto s = as<std::string>(v, key);
            if (s == "quasi_newton") t.solver = Solver::QuasiNewton;
            else if (s == "adam") t.solver = Solver::Adam;
            else throw ValidationError("unknown solver '" + s + "'");
        } else if (k == "max_iter") t.max_iter = as<std::size_t>(v, key);
        else if (k == "tolerance") t.tolerance = as<double>(v, key);
        else if (k == "learning_rate") t.learning_rate = as<double>(v, key);
        else if (k == "epochs") t.epochs = as<std::size_t>(v, key);
        else unknown("train.", k);
    }
}

void read_synthetic(const json& j, RunConfig& cfg) {
    if (!j.is_object()) throw ValidationError("config 'synthetic' must be an object");
    SyntheticSpec s = cfg.synthetic.value_or(SyntheticSpec{});
    for (const auto& [k, v] : j.items()) {
        const std::string key = "synthetic." + k;
        if (k == "markets") cfg.synthetic_markets = as<std::size_t>(v, key);
        else if (k == "n_days") s.n_days = as<std::size_t>(v, key);
        else if (k == "base_price") s.base_price = as<double>(v, key);
        else if (k == "trend_slope") s.trend_slope = as<double>(v, key);
        else if (k == "seasonal_amplitude") s.seasonal_amplitude = as<double>(v, key);
        else if (k == "seasonal_period") s.seasonal_period = as<double>(v, key);
        else if (k == "noise_std") s.noise_std = as<double>(v, key);
        else if (k == "ar1_coeff") s.ar1_coeff = as<double>(v, key);
        else if (k == "missing_rate") s.missing_rate = as<double>(v, key);
        else if (k == "outlier_rate") s.outlier_rate = as<double>(v, key);
        else if (k == "outlier_scale") s.outlier_scale = as<double>(v, key);
        else if (k == "start_date") s.start_date = as_date(v, key);
        else if (k == "crop_id") s.crop_id = as<std::string>(v, key);
        else if (k == "weather_coupling") s.weather_coupling = as<double>(v, key);
        else if (k == "weather_lag") s.weather_lag = as<std::size_t>(v, key);
        else if (k == "weather_persistence") s.weather_persistence = as<double>(v, key);
        else if (k == "regime_length") s.regime_length = as<std::size_t>(v, key);
        else if (k == "regime_slope") s.regime_slope = as<double>(v, key);
        else if (k == "base_arrival") s.base_arrival = as<double>(v, key);
        else unknown("synthetic.", k);
    }
    cfg.synthetic = s;
}

void read_data(const json& j, RunConfig& cfg) {
    if (!j.is_object()) throw ValidationError("config 'data' must be an object");
    DataSource d = cfg.data.value_or(DataSource{});
    for (const auto& [k, v] : j.items()) {
        const std::string key = "data." + k;
        if (k == "market_csv") d.market_csv = as<std::string>(v, key);
        else if (k == "weather_csv") d.weather_csv = as<std::string>(v, key);
        else if (k == "start_date") d.start_date = as_date(v, key);
        else if (k == "end_date") d.end_date = as_date(v, key);
        else if (k == "closed_weekday") d.closed_weekday = parse_weekday(as<std::string>(v, key));
        else unknown("data.", k);
    }
    if (d.market_csv.empty()) throw ValidationError("config 'data.market_csv' is required");
    cfg.data = d;
}

json to_json(const FeatureConfig& f) {
    return {{"k", f.k},
            {"horizon", f.horizon},
            {"fft_retained", f.fft_retained},
            {"sma_windows", f.sma_windows},
            {"ema_coms", f.ema_coms},
            {"mstd_window", f.mstd_window},
            {"macd_fast", f.macd_fast},
            {"macd_slow", f.macd_slow},
            {"include_day", f.include_day},
            {"include_month", f.include_month},
            {"standardize", f.standardize},
            {"include_weather", f.include_weather},
            {"include_quality", f.include_quality}};
}

json to_json(const RunConfig& c) {
    json j;
    if (c.data) {
        json d{{"market_csv", c.data->market_csv.string()},
               {"closed_weekday", std::string(std::array{"sunday", "monday", "tuesday", "wednesday", "thursday",
                                                         "friday", "saturday"}[static_cast<int>(c.data->closed_weekday)])}};
        if (c.data->weather_csv) d["weather_csv"] = c.data->weather_csv->string();
        if (c.data->start_date) d["start_date"] = format_date(*c.data->start_date);
        if (c.data->end_date) d["end_date"] = format_date(*c.data->end_date);
        j["data"] = d;
    }
    if (c.synthetic) {
        const SyntheticSpec& s = *c.synthetic;
        j["synthetic"] = {{"markets", c.synthetic_markets},
                          {"n_days", s.n_days},
                          {"base_price", s.base_price},
                          {"trend_slope", s.trend_slope},
                          {"seasonal_amplitude", s.seasonal_amplitude},
                          {"seasonal_period", s.seasonal_period},
                          {"noise_std", s.noise_std},
                          {"ar1_coeff", s.ar1_coeff},
                          {"missing_rate", s.missing_rate},
                          {"outlier_rate", s.outlier_rate},
                          {"outlier_scale", s.outlier_scale},
                          {"start_date", format_date(s.start_date)},
                          {"crop_id", s.crop_id},
                          {"weather_coupling", s.weather_coupling},
                          {"weather_lag", s.weather_lag},
                          {"weather_persistence", s.weather_persistence},
                          {"regime_length", s.regime_length},
                          {"regime_slope", s.regime_slope},
                          {"base_arrival", s.base_arrival}};
    }
    j["crops"] = c.crops;
    j["markets"] = c.markets;
    j["features"] = to_json(c.features);
    j["train"] = {{"solver", c.train.solver == Solver::QuasiNewton ? "quasi_newton" : "adam"},
                  {"max_iter", c.train.max_iter},
                  {"tolerance", c.train.tolerance},
                  {"learning_rate", c.train.learning_rate},
                  {"epochs", c.train.epochs}};
    j["model"] = std::string(to_string(c.model));
    std::vector<std::string> names;
    for (StrategyKind k : c.strategies) names.emplace_back(to_string(k));
    j["strategies"] = names;
    j["train_days"] = c.train_days;
    j["test_days"] = c.test_days;
    j["output_dir"] = c.output_dir.string();
    j["seed"] = c.seed;
    j["catalog_capacity"] = c.catalog_capacity;
    j["validation_rows"] = c.validation_rows;
    j["gate"] = {{"window", c.gate_window}, {"missing_run", c.gate_missing_run}, {"outliers", c.gate_on_outliers}};
    j["ced_metric"] = c.ced_metric == CedMetric::Mape ? "mape" : "rmse";
    j["plots"] = c.plots;
    j["save_catalogs"] = c.save_catalogs;
    return j;
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text, RunConfig cfg) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("config must be a JSON object");
    for (const auto& [k, v] : j.items()) {
        if (k == "data") read_data(v, cfg);
        else if (k == "synthetic") read_synthetic(v, cfg);
        else if (k == "crops") cfg.crops = as<std::vector<std::string>>(v, k);
        else if (k == "markets") cfg.markets = as<std::vector<std::string>>(v, k);
        else if (k == "features") read_features(v, cfg.features);
        else if (k == "train") read_train(v, cfg.train);
        else if (k == "model") {
            const auto m = parse_model_kind(as<std::string>(v, k));
            if (!m) throw ValidationError("unknown model '" + as<std::string>(v, k) + "' (mlp, lstm)");
            cfg.model = *m;
        } else if (k == "strategies") {
            cfg.strategies.clear();
            for (const auto& name : as<std::vector<std::string>>(v, k)) {
                const auto s = parse_strategy(name);
                if (!s) throw ValidationError("unknown strategy '" + name + "'");
                cfg.strategies.push_back(*s);
            }
        } else if (k == "train_days") cfg.train_days = as<std::size_t>(v, k);
        else if (k == "test_days") cfg.test_days = as<std::size_t>(v, k);
        else if (k == "output_dir") cfg.output_dir = as<std::string>(v, k);
        else if (k == "seed") cfg.seed = as<std::uint64_t>(v, k);
        else if (k == "catalog_capacity") cfg.catalog_capacity = as<std::size_t>(v, k);
        else if (k == "validation_rows") cfg.validation_rows = as<std::size_t>(v, k);
        else if (k == "gate") {
            if (!v.is_object()) throw ValidationError("config 'gate' must be an object");
            for (const auto& [gk, gv] : v.items()) {
                if (gk == "window") cfg.gate_window = as<std::size_t>(gv, "gate.window");
                else if (gk == "missing_run") cfg.gate_missing_run = as<std::size_t>(gv, "gate.missing_run");
                else if (gk == "outliers") cfg.gate_on_outliers = as<bool>(gv, "gate.outliers");
                else unknown("gate.", gk);
            }
        } else if (k == "ced_metric") {
            const auto m = as<std::string>(v, k);
            if (m == "mape") cfg.ced_metric = CedMetric::Mape;
            else if (m == "rmse") cfg.ced_metric = CedMetric::Rmse;
            else throw ValidationError("unknown ced_metric '" + m + "'");
        } else if (k == "plots") cfg.plots = as<bool>(v, k);
        else if (k == "save_catalogs") cfg.save_catalogs = as<bool>(v, k);
        else unknown("", k);
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& file, RunConfig base) {
    std::ifstream in(file);
    if (!in) throw ValidationError("cannot read config " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str(), std::move(base));
}

std::string run_config_json(const RunConfig& cfg) { return to_json(cfg).dump(2); }

// ---------------------------------------------------------------- panels

namespace {

TradingCalendar csv_calendar(const DataSource& d) {
    Day lo = d.start_date.value_or(0);
    Day hi = d.end_date.value_or(0);
    if (!d.start_date || !d.end_date) {
        std::ifstream in(d.market_csv);
        if (!in) throw Error("cannot open " + d.market_csv.string());
        std::string line;
        std::getline(in, line);
        std::optional<Day> first, last;
        while (std::getline(in, line)) {
            const auto comma = line.find(',');
            const auto day = parse_date(line.substr(0, comma));
            if (!day) continue;  // reported by the loader
            first = first ? std::min(*first, *day) : *day;
            last = last ? std::max(*last, *day) : *day;
        }
        if (!first) throw InsufficientDataError(d.market_csv.string() + " has no dated rows");
        if (!d.start_date) lo = *first;
        if (!d.end_date) hi = *last;
    }
    return TradingCalendar(lo, hi, d.closed_weekday);
}

bool selected(const std::vector<std::string>& filter, const std::string& id) {
    return filter.empty() || std::find(filter.begin(), filter.end(), id) != filter.end();
}

}  // namespace

std::map<std::string, std::vector<AlignedSeries>> load_panels(const RunConfig& cfg) {
    std::map<std::string, std::vector<AlignedSeries>> panels;
    if (cfg.data) {
        const TradingCalendar cal = csv_calendar(*cfg.data);
        const SeriesCollection markets = load_market_csv(cfg.data->market_csv, cal);
        WeatherCollection weather;
        if (cfg.data->weather_csv) weather = load_weather_csv(*cfg.data->weather_csv, cal);
        for (const auto& [key, s] : markets) {
            if (!selected(cfg.crops, key.crop_id) || !selected(cfg.markets, key.market_id)) continue;
            const auto w = weather.find(key.market_id);
            panels[key.crop_id].push_back(w == weather.end() ? s : align(s, w->second));
        }
        for (auto& [crop, group] : panels) {
            TradingCalendar common = group.front().calendar;
            for (const AlignedSeries& s : group) common = common.intersect(s.calendar);
            if (common.empty()) throw AlignmentError("markets of crop " + crop + " share no trading days");
            for (AlignedSeries& s : group) {
                const std::size_t first = *s.calendar.index_of(common[0]);
                s = s.slice(first, common.size());
            }
        }
    } else {
        SyntheticSpec spec = *cfg.synthetic;
        spec.seed = synthetic_seed(cfg.seed);
        for (SyntheticSeries& g : generate_market_panel(spec, cfg.synthetic_markets)) {
            if (!selected(cfg.crops, g.series.crop_id) || !selected(cfg.markets, g.series.market_id)) continue;
            panels[g.series.crop_id].push_back(std::move(g.series));
        }
    }
    return panels;
}

// ---------------------------------------------------------------- run

RunOutcome run(const RunConfig& cfg) {
    cfg.validate();
    RunOutcome outcome;
    const auto panels = load_panels(cfg);
    if (panels.empty()) throw ValidationError("the crop/market selectors match no series");
    const std::filesystem::path out = cfg.output_dir;
    std::filesystem::create_directories(out);

    WalkForwardConfig wf;
    wf.train_days = cfg.train_days;
    wf.test_days = cfg.test_days;
    wf.features = cfg.features;
    wf.ced_metric = cfg.ced_metric;

    StrategyOptions so;
    so.model = cfg.model;
    so.train = cfg.train;
    so.k = cfg.features.k;
    so.horizon = cfg.features.horizon;
    so.catalog_capacity = cfg.catalog_capacity;
    so.validation_rows = cfg.validation_rows;
    so.gate_window = cfg.gate_window;
    so.gate_missing_run = cfg.gate_missing_run;
    so.gate_on_outliers = cfg.gate_on_outliers;
    so.seed = model_seed(cfg.seed);

    json series_log = json::array();
    for (const auto& [crop, panel] : panels) {
        std::vector<std::unique_ptr<Strategy>> owned;
        std::vector<Strategy*> strategies;
        for (StrategyKind k : cfg.strategies) {
            owned.push_back(make_strategy(k, so));
            strategies.push_back(owned.back().get());
        }
        std::vector<StrategyResult> results;
        try {
            results = rolling_evaluate(panel, strategies, wf);
        } catch (const Error& e) {
            outcome.failures.push_back("crop " + crop + ": " + e.what());
            continue;
        }
        for (std::size_t s = 0; s < results.size(); ++s) {
            const StrategyResult& r = results[s];
            for (const EvaluationReport& rep : r.reports) {
                const std::filesystem::path dir = out / crop / r.strategy / rep.market_id;
                write_errors_csv(dir / "errors.csv", rep);
                write_ced_csv(dir / "ced.csv", rep.ced);
                write_decisions_csv(dir / "decisions.csv", r.strategy, strategies[s]->decisions(rep.market_id));
                const bool completed = rep.ar_days > 0;
                if (!completed) outcome.failures.push_back(crop + "/" + r.strategy + "/" + rep.market_id + ": no evaluable forecast");
                series_log.push_back({{"crop", crop},
                                      {"strategy", r.strategy},
                                      {"market", rep.market_id},
                                      {"evaluated_days", rep.ar_days},
                                      {"failed_days", rep.failed_days},
                                      {"completed", completed}});
                outcome.reports.push_back(rep);
            }
            if (cfg.save_catalogs) {
                for (const auto& [name, cat] : strategies[s]->catalog_list()) {
                    save_catalog(out / crop / r.strategy / "catalogs" / name, *cat);
                }
            }
        }
        if (cfg.plots) {
            for (std::size_t m = 0; m < panel.size(); ++m) {
                std::vector<PlotLine> errors, ceds;
                for (const StrategyResult& r : results) {
                    const EvaluationReport& rep = r.reports[m];
                    PlotLine e{r.strategy, {}, {}};
                    for (std::size_t i = 0; i < rep.records.size(); ++i) {
                        e.x.push_back(static_cast<double>(i + 1));
                        e.y.push_back(rep.records[i].failure ? std::numeric_limits<double>::quiet_NaN()
                                                             : rep.records[i].metrics.mape);
                    }
                    errors.push_back(std::move(e));
                    PlotLine c{r.strategy, {}, {}};
                    for (const CedPoint& p : rep.ced) {
                        c.x.push_back(p.threshold);
                        c.y.push_back(p.fraction);
                    }
                    ceds.push_back(std::move(c));
                }
                const std::string& id = panel[m].market_id;
                write_line_svg(out / crop / "plots" / (id + "_errors.svg"), "Forecast error, " + crop + " " + id,
                               "evaluation day", "MAPE (%)", errors);
                write_line_svg(out / crop / "plots" / (id + "_ced.svg"), "CED, " + crop + " " + id,
                               cfg.ced_metric == CedMetric::Mape ? "MAPE threshold (%)" : "RMSE threshold",
                               "fraction of forecasts", ceds);
            }
        }
    }
    write_summary_csv(out / "summary.csv", outcome.reports);

    json manifest{{"version", kVersion},
                  {"config", to_json(cfg)},
                  {"seeds",
                   {{"global", cfg.seed}, {"synthetic", synthetic_seed(cfg.seed)}, {"models", model_seed(cfg.seed)}}},
                  {"series", series_log},
                  {"failures", outcome.failures}};
    std::ofstream mf(out / "run_manifest.json", std::ios::trunc);
    mf << manifest.dump(2) << '\n';
    outcome.exit_status = outcome.failures.empty() ? 0 : 1;
    return outcome;
}

}  // namespace cropcast
