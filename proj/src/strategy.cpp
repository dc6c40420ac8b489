#include "cropcast/strategy.hpp"

#include <algorithm>
#include <array>

#include "cropcast/error.hpp"
#include "cropcast/evaluation.hpp"
#include "cropcast/rng.hpp"
#include "cropcast/stats.hpp"

namespace cropcast {

namespace {

constexpr std::array<std::pair<StrategyKind, std::string_view>, 6> kStrategyNames{{
    {StrategyKind::Continuous, "continuous"},
    {StrategyKind::Stability, "stability"},
    {StrategyKind::QualityGated, "quality_gated"},
    {StrategyKind::TrendMarket, "trend_market"},
    {StrategyKind::TrendCrop, "trend_crop"},
    {StrategyKind::ArBaseline, "ar_baseline"},
}};

constexpr std::array<TrendPolarity, 2> kPolarities{TrendPolarity::Positive, TrendPolarity::Negative};

std::string polarity_tag(TrendPolarity p) { return std::string(to_string(p)); }

Eigen::MatrixXd standardized_targets(const MarketDay& d) {
    return (d.supervised->targets.array() - d.frame->price_mean) / d.frame->price_scale;
}

Eigen::MatrixXd as_sequence(const Eigen::RowVectorXd& row, std::size_t k) {
    const auto rows = static_cast<Eigen::Index>(k);
    return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        row.data(), rows, row.size() / rows);
}

Eigen::VectorXd predict_standardized(const Model& model, const Eigen::RowVectorXd& row, std::size_t k) {
    if (const auto* mlp = std::get_if<MlpModel>(&model)) return mlp_predict(*mlp, row);
    if (const auto* lstm = std::get_if<LstmModel>(&model)) return lstm_predict(*lstm, as_sequence(row, k));
    throw Error("catalog models must be networks");
}

Eigen::MatrixXd gather(const Eigen::MatrixXd& m, const std::vector<std::size_t>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = m.row(static_cast<Eigen::Index>(rows[r]));
    return out;
}

std::vector<std::size_t> last_rows(std::size_t count, std::size_t n) {
    std::vector<std::size_t> rows;
    for (std::size_t r = n - std::min(count, n); r < n; ++r) rows.push_back(r);
    return rows;
}

std::vector<std::size_t> last_of(const std::vector<std::size_t>& rows, std::size_t count) {
    return {rows.end() - static_cast<std::ptrdiff_t>(std::min(count, rows.size())), rows.end()};
}

}  // namespace

std::string_view to_string(StrategyKind kind) {
    for (const auto& [k, n] : kStrategyNames) {
        if (k == kind) return n;
    }
    return "unknown";
}

std::optional<StrategyKind> parse_strategy(std::string_view name) {
    for (const auto& [k, n] : kStrategyNames) {
        if (n == name) return k;
    }
    return std::nullopt;
}

std::string_view to_string(ModelKind kind) { return kind == ModelKind::Mlp ? "mlp" : "lstm"; }

std::optional<ModelKind> parse_model_kind(std::string_view name) {
    if (name == "mlp") return ModelKind::Mlp;
    if (name == "lstm") return ModelKind::Lstm;
    return std::nullopt;
}

void StrategyOptions::validate() const {
    train.validate();
    if (k < 1 || horizon < 1) throw ValidationError("strategy: k and horizon must be >= 1");
    if (catalog_capacity < 1) throw ValidationError("strategy: catalog capacity must be >= 1");
    if (validation_rows < 1) throw ValidationError("strategy: validation rows must be >= 1");
    if (gate_window < 1 || gate_missing_run < 1) throw ValidationError("strategy: gate window and run must be >= 1");
    if (trend_window < 2) throw ValidationError("strategy: trend window must be >= 2");
    if (ar_max_order < 1) throw ValidationError("strategy: AR order must be >= 1");
}

TrendLabel window_trend(const Eigen::VectorXd& prices, std::size_t i, std::size_t window) {
    const std::size_t len = std::min(window, i + 1);
    return trend_score(prices.segment(static_cast<Eigen::Index>(i + 1 - len), static_cast<Eigen::Index>(len)));
}

std::optional<std::string> gate_reason(const QualityReport& report, std::size_t window, std::size_t missing_run,
                                       bool on_outliers) {
    const auto n = report.missing_mask.size();
    const auto w = std::min<Eigen::Index>(static_cast<Eigen::Index>(window), n);
    if (on_outliers) {
        const auto outliers = report.outlier_mask.tail(w).count();
        if (outliers > 0) {
            return std::to_string(outliers) + " outlier(s) in the last " + std::to_string(window) + " days";
        }
    }
    const std::size_t run = max_run(report.missing_mask.tail(w));
    if (run >= missing_run) {
        return "missing run of " + std::to_string(run) + " in the last " + std::to_string(window) + " days";
    }
    return std::nullopt;
}

Eigen::VectorXd forecast_with(const CatalogEntry& entry, const MarketDay& day, std::size_t k) {
    const auto it = entry.scalers.find(day.market_id);
    if (it == entry.scalers.end()) {
        throw Error("model v" + std::to_string(entry.version) + " has no scaler for market " + day.market_id);
    }
    const Scaler& s = it->second;
    const FeatureFrame& f = *day.frame;
    if (f.size() < k) throw InsufficientDataError("fewer than k days available for the forecast input");
    const auto w = static_cast<Eigen::Index>(f.width());
    if (s.mean.size() != w) throw ShapeError("scaler width does not match the feature frame");
    Eigen::RowVectorXd row(static_cast<Eigen::Index>(k) * w);
    const auto first = static_cast<Eigen::Index>(f.size() - k);
    for (Eigen::Index d = 0; d < static_cast<Eigen::Index>(k); ++d) {
        row.segment(d * w, w) = (f.raw.row(first + d) - s.mean).cwiseQuotient(s.scale);
    }
    const Eigen::VectorXd z = predict_standardized(*entry.model, row, k);
    return (z.array() * s.price_scale + s.price_mean).matrix();
}

// ---------------------------------------------------------------- base

Strategy::Strategy(StrategyOptions options) : opt_(std::move(options)) { opt_.validate(); }

std::vector<Selection> Strategy::step(const std::vector<MarketDay>& day) {
    std::vector<Selection> out(day.size());
    try {
        select(day, out);
    } catch (const Error& e) {
        for (std::size_t i = 0; i < day.size(); ++i) {
            out[i] = Selection{};
            out[i].failure = e.what();
            log(day[i], "fail", e.what());
        }
    }
    return out;
}

const ModelCatalog* Strategy::catalog(const std::string& owner, std::optional<TrendPolarity> polarity) const {
    const auto it = catalogs_.find({owner, polarity ? static_cast<int>(*polarity) : -1});
    return it == catalogs_.end() ? nullptr : &it->second;
}

std::vector<std::pair<std::string, const ModelCatalog*>> Strategy::catalog_list() const {
    std::vector<std::pair<std::string, const ModelCatalog*>> out;
    for (const auto& [key, cat] : catalogs_) {
        std::string name = key.first;
        if (key.second >= 0) name += "_" + polarity_tag(static_cast<TrendPolarity>(key.second));
        out.emplace_back(std::move(name), &cat);
    }
    return out;
}

ModelCatalog& Strategy::catalog_for(const std::string& owner, std::optional<TrendPolarity> polarity) {
    const CatalogKey key{owner, polarity ? static_cast<int>(*polarity) : -1};
    auto it = catalogs_.find(key);
    if (it == catalogs_.end()) it = catalogs_.emplace(key, ModelCatalog(opt_.catalog_capacity)).first;
    return it->second;
}

const std::vector<DecisionRow>& Strategy::decisions(const std::string& market_id) const {
    static const std::vector<DecisionRow> none;
    const auto it = decisions_.find(market_id);
    return it == decisions_.end() ? none : it->second;
}

void Strategy::log(const MarketDay& day, const std::string& action, const std::string& reason) {
    decisions_[day.market_id].push_back({day.date, action, reason});
}

std::uint64_t Strategy::training_seed(const std::string& owner, std::size_t issue) const {
    return derive_seed(opt_.seed, "train:" + owner, issue);
}

const CatalogEntry& Strategy::train_and_store(ModelCatalog& catalog, const Eigen::MatrixXd& inputs,
                                              const Eigen::MatrixXd& std_targets, std::uint64_t seed,
                                              Day trained_through, std::map<std::string, Scaler> scalers,
                                              std::optional<TrendPolarity> polarity,
                                              const std::vector<const MarketDay*>& validation_days,
                                              const std::vector<std::vector<std::size_t>>& validation_rows) {
    if (inputs.rows() < 1) throw InsufficientDataError("no training rows");
    TrainConfig cfg = opt_.train;
    cfg.seed = seed;
    CatalogEntry entry;
    if (opt_.model == ModelKind::Mlp) {
        SupervisedSet s;
        s.inputs = inputs;
        s.targets = std_targets;
        entry.model = std::make_shared<const Model>(mlp_train(s, cfg));
    } else {
        SequenceSet s;
        s.targets = std_targets;
        s.sequences.reserve(static_cast<std::size_t>(inputs.rows()));
        for (Eigen::Index r = 0; r < inputs.rows(); ++r) {
            s.sequences.push_back(as_sequence(inputs.row(r), opt_.k));
        }
        entry.model = std::make_shared<const Model>(lstm_train(s, cfg, opt_.lstm_shape));
    }
    ++training_runs_;
    entry.version = next_version_++;
    entry.trained_through = trained_through;
    entry.polarity = polarity;
    entry.scalers = std::move(scalers);

    double rmse = 0.0;
    double mape = 0.0;
    std::size_t n_rmse = 0;
    std::size_t n_mape = 0;
    for (std::size_t i = 0; i < validation_days.size(); ++i) {
        const MarketDay& d = *validation_days[i];
        const Scaler& s = entry.scalers.at(d.market_id);
        for (std::size_t r : validation_rows[i]) {
            const Eigen::RowVectorXd x = d.supervised->inputs.row(static_cast<Eigen::Index>(r));
            const Eigen::VectorXd pred =
                (predict_standardized(*entry.model, x, opt_.k).array() * s.price_scale + s.price_mean).matrix();
            const ForecastMetrics m = forecast_metrics(pred, d.supervised->targets.row(static_cast<Eigen::Index>(r)).transpose());
            if (m.evaluable()) {
                rmse += m.rmse;
                ++n_rmse;
            }
            if (m.mape_evaluable()) {
                mape += m.mape;
                ++n_mape;
            }
        }
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    entry.validation_ar = n_rmse > 0 ? rmse / static_cast<double>(n_rmse) : nan;
    entry.validation_am = n_mape > 0 ? mape / static_cast<double>(n_mape) : nan;
    catalog.put(std::move(entry));
    return catalog.newest();
}

Selection Strategy::use(const CatalogEntry& entry, const MarketDay& day, std::string action, std::string reason) const {
    Selection s;
    s.forecast = forecast_with(entry, day, opt_.k);
    s.version = entry.version;
    s.trained_through = entry.trained_through;
    s.validation_ar = entry.validation_ar;
    s.validation_am = entry.validation_am;
    s.polarity = entry.polarity;
    s.action = std::move(action);
    s.reason = std::move(reason);
    return s;
}

namespace {

// ---------------------------------------------------------------- strategies

/// Retrains on everything available every day.
class Continuous : public Strategy {
public:
    using Strategy::Strategy;
    StrategyKind kind() const override { return StrategyKind::Continuous; }

protected:
    void select(const std::vector<MarketDay>& day, std::vector<Selection>& out) override {
        for (std::size_t i = 0; i < day.size(); ++i) out[i] = retrain(day[i], "daily retrain");
    }

    Selection retrain(const MarketDay& d, const std::string& reason) {
        ModelCatalog& cat = catalog_for(d.market_id, std::nullopt);
        try {
            const std::size_t n = static_cast<std::size_t>(d.supervised->rows());
            const CatalogEntry& e = train_and_store(
                cat, d.supervised->inputs, standardized_targets(d), training_seed(d.market_id, d.issue), d.date,
                {{d.market_id, Scaler::of(*d.frame)}}, std::nullopt, {&d}, {last_rows(opt_.validation_rows, n)});
            Selection s = use(e, d, "train", reason);
            log(d, s.action, s.reason);
            return s;
        } catch (const Error& err) {
            return fallback(cat, d, err.what());
        }
    }

    Selection fallback(const ModelCatalog& cat, const MarketDay& d, const std::string& why) {
        Selection s;
        if (cat.empty()) {
            s.failure = why;
            log(d, "fail", why);
            return s;
        }
        s = use(cat.newest(), d, "fallback", why);
        log(d, s.action, s.reason);
        return s;
    }
};

/// Daily retrain with a held-out validation tail; serves the catalog argmin.
class Stability : public Continuous {
public:
    using Continuous::Continuous;
    StrategyKind kind() const override { return StrategyKind::Stability; }

protected:
    void select(const std::vector<MarketDay>& day, std::vector<Selection>& out) override {
        for (std::size_t i = 0; i < day.size(); ++i) {
            const MarketDay& d = day[i];
            ModelCatalog& cat = catalog_for(d.market_id, std::nullopt);
            try {
                const auto n = static_cast<std::size_t>(d.supervised->rows());
                const std::size_t v = opt_.validation_rows;
                if (n <= v) {
                    throw InsufficientDataError(std::to_string(n) + " supervised rows leave nothing to fit after " +
                                                std::to_string(v) + " validation rows");
                }
                const auto fit = static_cast<Eigen::Index>(n - v);
                train_and_store(cat, d.supervised->inputs.topRows(fit), standardized_targets(d).topRows(fit),
                                training_seed(d.market_id, d.issue), d.date, {{d.market_id, Scaler::of(*d.frame)}},
                                std::nullopt, {&d}, {last_rows(v, n)});
                const CatalogEntry& best = cat.best(opt_.selection_metric);
                out[i] = use(best, d, "train", "serving catalog best v" + std::to_string(best.version));
                log(d, out[i].action, out[i].reason);
            } catch (const Error& err) {
                if (cat.empty()) {
                    out[i] = fallback(cat, d, err.what());
                    continue;
                }
                out[i] = use(cat.best(opt_.selection_metric), d, "fallback", err.what());
                log(d, out[i].action, out[i].reason);
            }
        }
    }
};

/// Continuous retraining that skips days whose recent data looks unreliable.
class QualityGated : public Continuous {
public:
    using Continuous::Continuous;
    StrategyKind kind() const override { return StrategyKind::QualityGated; }

protected:
    void select(const std::vector<MarketDay>& day, std::vector<Selection>& out) override {
        for (std::size_t i = 0; i < day.size(); ++i) {
            const MarketDay& d = day[i];
            const ModelCatalog& cat = catalog_for(d.market_id, std::nullopt);
            const auto why = gate_reason(*d.report, opt_.gate_window, opt_.gate_missing_run, opt_.gate_on_outliers);
            if (why && !cat.empty()) {
                out[i] = use(cat.best(opt_.selection_metric), d, "skip", *why);
                log(d, "skip", *why);
            } else {
                out[i] = retrain(d, why ? "catalog empty; " + *why : "recent data clean");
            }
        }
    }
};

/// Two catalogs per market, routed by the trend of the last few prices.
class TrendMarket : public Strategy {
public:
    using Strategy::Strategy;
    StrategyKind kind() const override { return StrategyKind::TrendMarket; }

protected:
    void select(const std::vector<MarketDay>& day, std::vector<Selection>& out) override {
        for (std::size_t i = 0; i < day.size(); ++i) {
            const MarketDay& d = day[i];
            for (TrendPolarity p : kPolarities) catalog_for(d.market_id, p);
            TrendLabel label;
            try {
                label = window_trend(d.frame->price, d.issue, opt_.trend_window);
            } catch (const Error& err) {
                out[i].failure = err.what();
                log(d, "fail", err.what());
                continue;
            }
            ModelCatalog& cat = catalog_for(d.market_id, label.polarity);
            try {
                std::vector<std::size_t> rows = matching_rows(d, label.polarity);
                std::string reason = polarity_tag(label.polarity) + " trend";
                if (rows.empty()) {
                    rows = last_rows(static_cast<std::size_t>(d.supervised->rows()), static_cast<std::size_t>(d.supervised->rows()));
                    reason += "; no matching rows, trained on all";
                }
                const CatalogEntry& e = train_and_store(
                    cat, gather(d.supervised->inputs, rows), gather(standardized_targets(d), rows),
                    training_seed(d.market_id + ":" + polarity_tag(label.polarity), d.issue), d.date,
                    {{d.market_id, Scaler::of(*d.frame)}}, label.polarity, {&d},
                    {last_of(rows, opt_.validation_rows)});
                out[i] = use(e, d, "train", reason);
            } catch (const Error& err) {
                if (cat.empty()) {
                    out[i].failure = err.what();
                    log(d, "fail", err.what());
                    continue;
                }
                out[i] = use(cat.newest(), d, "fallback", err.what());
            }
            out[i].polarity = label.polarity;
            out[i].trend_score = label.score;
            log(d, out[i].action, out[i].reason);
        }
    }

    std::vector<std::size_t> matching_rows(const MarketDay& d, TrendPolarity p) const {
        std::vector<std::size_t> rows;
        const auto& issues = d.supervised->issue_rows;
        for (std::size_t r = 0; r < issues.size(); ++r) {
            try {
                if (window_trend(d.frame->price, issues[r], opt_.trend_window).polarity == p) rows.push_back(r);
            } catch (const DomainError&) {
                // rows whose window holds a non-positive price have no polarity
            }
        }
        return rows;
    }
};

/// One pair of catalogs per crop, trained on rows pooled over its markets.
class TrendCrop : public TrendMarket {
public:
    using TrendMarket::TrendMarket;
    StrategyKind kind() const override { return StrategyKind::TrendCrop; }

protected:
    void select(const std::vector<MarketDay>& day, std::vector<Selection>& out) override {
        std::map<std::pair<std::string, int>, std::vector<std::size_t>> routed;  // (crop, polarity) -> markets
        std::vector<TrendLabel> labels(day.size());
        for (std::size_t i = 0; i < day.size(); ++i) {
            for (TrendPolarity p : kPolarities) catalog_for(owner(day[i]), p);
            try {
                labels[i] = window_trend(day[i].frame->price, day[i].issue, opt_.trend_window);
                routed[{day[i].crop_id, static_cast<int>(labels[i].polarity)}].push_back(i);
            } catch (const Error& err) {
                out[i].failure = err.what();
                log(day[i], "fail", err.what());
            }
        }
        for (const auto& [key, members] : routed) {
            const auto p = static_cast<TrendPolarity>(key.second);
            const MarketDay& first = day[members.front()];
            ModelCatalog& cat = catalog_for(owner(first), p);
            const CatalogEntry* entry = nullptr;
            std::string reason = polarity_tag(p) + " trend, pooled over crop " + key.first;
            try {
                entry = &train_pooled(day, key.first, p, cat);
            } catch (const Error& err) {
                reason = err.what();
            }
            for (std::size_t i : members) {
                const MarketDay& d = day[i];
                try {
                    if (entry != nullptr) {
                        out[i] = use(*entry, d, "train", reason);
                    } else if (!cat.empty()) {
                        out[i] = use(cat.newest(), d, "fallback", reason);
                    } else {
                        throw Error(reason);
                    }
                    out[i].polarity = p;
                    out[i].trend_score = labels[i].score;
                    log(d, out[i].action, out[i].reason);
                } catch (const Error& err) {
                    out[i] = Selection{};
                    out[i].failure = err.what();
                    log(d, "fail", err.what());
                }
            }
        }
    }

private:
    static std::string owner(const MarketDay& d) { return "crop:" + d.crop_id; }

    const CatalogEntry& train_pooled(const std::vector<MarketDay>& day, const std::string& crop, TrendPolarity p,
                                     ModelCatalog& cat) {
        std::vector<const MarketDay*> members;
        std::vector<std::vector<std::size_t>> rows;
        std::map<std::string, Scaler> scalers;
        Eigen::Index total = 0;
        Day through = 0;
        std::size_t issue = 0;
        for (const MarketDay& d : day) {
            if (d.crop_id != crop) continue;
            std::vector<std::size_t> r = matching_rows(d, p);
            if (r.empty()) continue;
            total += static_cast<Eigen::Index>(r.size());
            members.push_back(&d);
            rows.push_back(std::move(r));
            scalers.emplace(d.market_id, Scaler::of(*d.frame));
            through = std::max(through, d.date);
            issue = std::max(issue, d.issue);
        }
        if (total == 0) throw InsufficientDataError("no pooled rows with " + polarity_tag(p) + " trend");
        const Eigen::Index width = members.front()->supervised->inputs.cols();
        Eigen::MatrixXd inputs(total, width);
        Eigen::MatrixXd targets(total, static_cast<Eigen::Index>(opt_.horizon));
        Eigen::Index at = 0;
        std::vector<std::vector<std::size_t>> validation;
        for (std::size_t m = 0; m < members.size(); ++m) {
            const auto n = static_cast<Eigen::Index>(rows[m].size());
            if (members[m]->supervised->inputs.cols() != width) throw ShapeError("markets disagree on feature width");
            inputs.middleRows(at, n) = gather(members[m]->supervised->inputs, rows[m]);
            targets.middleRows(at, n) = gather(standardized_targets(*members[m]), rows[m]);
            at += n;
            validation.push_back(last_of(rows[m], opt_.validation_rows));
        }
        // Markets routed elsewhere today still share the crop-level scalers.
        for (const MarketDay& d : day) {
            if (d.crop_id == crop) scalers.emplace(d.market_id, Scaler::of(*d.frame));
        }
        return train_and_store(cat, inputs, targets, training_seed("crop:" + crop + ":" + polarity_tag(p), issue),
                               through, std::move(scalers), p, members, validation);
    }
};

/// Differenced autoregression refitted on the imputed prices every day.
class ArBaselineStrategy : public Strategy {
public:
    using Strategy::Strategy;
    StrategyKind kind() const override { return StrategyKind::ArBaseline; }

protected:
    void select(const std::vector<MarketDay>& day, std::vector<Selection>& out) override {
        for (std::size_t i = 0; i < day.size(); ++i) {
            const MarketDay& d = day[i];
            try {
                const ArBaseline m = ar_fit(d.frame->price, opt_.ar_max_order);
                out[i].forecast = ar_predict(m, d.frame->price, opt_.horizon);
                out[i].trained_through = d.date;
                out[i].action = "fit";
                out[i].reason = "d=" + std::to_string(m.differencing) + " p=" + std::to_string(m.order);
                log(d, out[i].action, out[i].reason);
            } catch (const Error& err) {
                out[i].failure = err.what();
                log(d, "fail", err.what());
            }
        }
    }
};

}  // namespace

std::unique_ptr<Strategy> make_strategy(StrategyKind kind, const StrategyOptions& options) {
    switch (kind) {
        case StrategyKind::Continuous: return std::make_unique<Continuous>(options);
        case StrategyKind::Stability: return std::make_unique<Stability>(options);
        case StrategyKind::QualityGated: return std::make_unique<QualityGated>(options);
        case StrategyKind::TrendMarket: return std::make_unique<TrendMarket>(options);
        case StrategyKind::TrendCrop: return std::make_unique<TrendCrop>(options);
        case StrategyKind::ArBaseline: return std::make_unique<ArBaselineStrategy>(options);
    }
    throw ValidationError("unknown strategy");
}

}  // namespace cropcast
