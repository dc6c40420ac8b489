#include "cropcast/walk_forward.hpp"

#include <optional>

#include "cropcast/error.hpp"

namespace cropcast {

void WalkForwardConfig::validate() const {
    features.validate();
    if (train_days < 1) throw ValidationError("train_days must be >= 1");
    if (test_days < 1) throw ValidationError("test_days must be >= 1");
    if (!(quality.iqr_multiplier > 0.0)) throw ValidationError("IQR multiplier must be > 0");
}

namespace {

/// Per-market state carried from one issue day to the next.
struct MarketTrack {
    Eigen::VectorXd imputed_price;  // previous day's imputed prefix
    Eigen::MatrixXd fft;            // causal FFT columns for that prefix
};

struct Prepared {
    QualityReport report;
    FeatureFrame frame;
    SupervisedSet supervised;
};

Prepared prepare(const AlignedSeries& series, std::size_t issue, const WalkForwardConfig& cfg, MarketTrack& track) {
    Prepared p;
    const AlignedSeries prefix = series.prefix(issue + 1);
    p.report = quality_report(prefix, cfg.quality);
    const AlignedSeries imputed = impute_spline(prefix, p.report.missing_mask);

    Eigen::Index same = 0;
    const Eigen::Index limit = std::min(track.imputed_price.size(), imputed.price.size());
    while (same < limit && track.imputed_price[same] == imputed.price[same]) ++same;
    track.fft = causal_fft_columns(imputed.price, cfg.features.fft_retained, static_cast<std::size_t>(same),
                                   same > 0 ? &track.fft : nullptr);
    track.imputed_price = imputed.price;

    FrameOptions fo;
    fo.fft_columns = &track.fft;
    p.frame = build_feature_frame(imputed, p.report, cfg.features, fo);
    p.supervised = make_supervised(p.frame, cfg.features.k, cfg.features.horizon);
    return p;
}

Eigen::VectorXd truth_after(const AlignedSeries& s, std::size_t issue, std::size_t horizon) {
    Eigen::VectorXd t = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(horizon), kAbsent);
    for (std::size_t j = 0; j < horizon; ++j) {
        const std::size_t day = issue + 1 + j;
        if (day < static_cast<std::size_t>(s.price.size())) t[static_cast<Eigen::Index>(j)] = s.price[static_cast<Eigen::Index>(day)];
    }
    return t;
}

}  // namespace

std::vector<StrategyResult> rolling_evaluate(const std::vector<AlignedSeries>& panel,
                                             const std::vector<Strategy*>& strategies,
                                             const WalkForwardConfig& cfg, const DayObserver& observer) {
    cfg.validate();
    if (panel.empty()) throw ValidationError("rolling evaluation needs at least one series");
    if (strategies.empty()) throw ValidationError("rolling evaluation needs at least one strategy");
    for (const AlignedSeries& s : panel) {
        s.check_shape();
        if (!(s.calendar == panel.front().calendar)) throw AlignmentError("panel series must share one calendar");
        if (s.calendar.size() < cfg.train_days + cfg.test_days) {
            throw InsufficientDataError("series " + s.market_id + " has " + std::to_string(s.calendar.size()) +
                                        " days; train + test needs " +
                                        std::to_string(cfg.train_days + cfg.test_days));
        }
    }
    for (const Strategy* st : strategies) {
        if (st->options().k != cfg.features.k || st->options().horizon != cfg.features.horizon) {
            throw ValidationError("strategy k/horizon differ from the feature configuration");
        }
    }

    const std::size_t horizon = cfg.features.horizon;
    std::vector<MarketTrack> tracks(panel.size());
    std::vector<std::vector<std::vector<ForecastRecord>>> records(
        strategies.size(), std::vector<std::vector<ForecastRecord>>(panel.size()));

    for (std::size_t j = 0; j < cfg.test_days; ++j) {
        const std::size_t issue = cfg.train_days - 1 + j;
        const Day date = panel.front().calendar[issue];
        std::vector<std::optional<Prepared>> prepared(panel.size());
        std::vector<std::string> prep_error(panel.size());
        std::vector<MarketDay> day;
        std::vector<std::size_t> day_market;
        for (std::size_t m = 0; m < panel.size(); ++m) {
            try {
                prepared[m] = prepare(panel[m], issue, cfg, tracks[m]);
            } catch (const Error& e) {
                prep_error[m] = e.what();
                tracks[m] = MarketTrack{};
                continue;
            }
            day.push_back(MarketDay{panel[m].market_id, panel[m].crop_id, issue, date, &prepared[m]->frame,
                                    &prepared[m]->report, &prepared[m]->supervised});
            day_market.push_back(m);
        }

        for (std::size_t s = 0; s < strategies.size(); ++s) {
            std::vector<Selection> picks = day.empty() ? std::vector<Selection>{} : strategies[s]->step(day);
            for (std::size_t m = 0; m < panel.size(); ++m) {
                ForecastRecord rec;
                rec.issue_date = date;
                rec.issue_row = issue;
                rec.truth = truth_after(panel[m], issue, horizon);
                if (!prep_error[m].empty()) rec.failure = prep_error[m];
                records[s][m].push_back(std::move(rec));
            }
            for (std::size_t i = 0; i < day.size(); ++i) {
                const Selection& pick = picks[i];
                if (observer) observer(*strategies[s], day[i], pick);
                ForecastRecord& rec = records[s][day_market[i]].back();
                rec.model_version = pick.version;
                rec.trained_through = pick.trained_through;
                rec.polarity = pick.polarity;
                rec.action = pick.action;
                if (pick.failure) {
                    rec.failure = pick.failure;
                    continue;
                }
                if (pick.forecast.size() != static_cast<Eigen::Index>(horizon) || !pick.forecast.allFinite()) {
                    rec.failure = "forecast is not a finite vector of length " + std::to_string(horizon);
                    continue;
                }
                rec.forecast = pick.forecast;
                rec.metrics = forecast_metrics(rec.forecast, rec.truth);
            }
        }
    }

    std::vector<StrategyResult> out;
    for (std::size_t s = 0; s < strategies.size(); ++s) {
        StrategyResult r;
        r.strategy = std::string(strategies[s]->name());
        for (std::size_t m = 0; m < panel.size(); ++m) {
            r.reports.push_back(summarize(r.strategy, panel[m].market_id, std::move(records[s][m]), cfg.ced_metric));
        }
        r.catalogs = strategies[s]->catalog_count();
        r.training_runs = strategies[s]->training_runs();
        out.push_back(std::move(r));
    }
    return out;
}

EvaluationReport rolling_evaluate(const AlignedSeries& series, Strategy& strategy, const WalkForwardConfig& cfg) {
    auto results = rolling_evaluate(std::vector<AlignedSeries>{series}, std::vector<Strategy*>{&strategy}, cfg);
    return std::move(results.front().reports.front());
}

}  // namespace cropcast
