#include "cropcast/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "cropcast/error.hpp"
#include "cropcast/rng.hpp"

namespace cropcast {

namespace {

constexpr double kYear = 313.0;  // trading days per year with one closed weekday

Eigen::VectorXd regime_path(const SyntheticSpec& spec) {
    const auto n = static_cast<Eigen::Index>(spec.n_days);
    Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
    if (spec.regime_length == 0 || spec.regime_slope == 0.0) return r;
    Rng rng(derive_seed(spec.regime_seed, "regime"));
    const double mean_len = static_cast<double>(spec.regime_length);
    // Up and down legs of a cycle share one length so the path stays bounded.
    Eigen::Index t = 0;
    double level = 0.0;
    while (t < n) {
        const auto len = static_cast<Eigen::Index>(
            std::max(2.0, std::round(rng.uniform(0.5 * mean_len, 1.5 * mean_len))));
        for (int leg = 0; leg < 2; ++leg) {
            const double dir = leg == 0 ? 1.0 : -1.0;
            for (Eigen::Index i = 0; i < len && t < n; ++i, ++t) {
                level += dir * spec.regime_slope;
                r[t] = level;
            }
        }
    }
    return r.array() - 0.5 * spec.regime_slope * mean_len;
}

}  // namespace

void validate(const SyntheticSpec& s) {
    auto fail = [](const std::string& what) { throw ValidationError("synthetic spec: " + what); };
    if (s.n_days < 1) fail("n_days must be >= 1");
    if (!(s.missing_rate >= 0.0 && s.missing_rate <= 1.0)) fail("missing_rate outside [0, 1]");
    if (!(s.outlier_rate >= 0.0 && s.outlier_rate <= 1.0)) fail("outlier_rate outside [0, 1]");
    if (!(s.ar1_coeff > -1.0 && s.ar1_coeff < 1.0)) fail("ar1_coeff outside (-1, 1)");
    if (!(s.weather_persistence > -1.0 && s.weather_persistence < 1.0)) fail("weather_persistence outside (-1, 1)");
    if (!(s.noise_std >= 0.0)) fail("noise_std must be >= 0");
    if (!(s.seasonal_period > 0.0)) fail("seasonal_period must be > 0");
    if (!(s.outlier_scale > 0.0)) fail("outlier_scale must be > 0");
    if (!(s.base_price > 0.0)) fail("base_price must be > 0");
    if (!(s.base_arrival >= 0.0)) fail("base_arrival must be >= 0");
    if (s.market_id.empty()) fail("market_id must be non-empty");
}

SyntheticSeries generate_synthetic(const SyntheticSpec& spec) {
    validate(spec);
    const auto n = static_cast<Eigen::Index>(spec.n_days);
    const auto lag = static_cast<Eigen::Index>(spec.weather_lag);
    const double two_pi = 2.0 * std::numbers::pi;

    Rng noise_rng(derive_seed(spec.seed, "price-noise"));
    Rng driver_rng(derive_seed(spec.seed, "weather-driver"));
    Rng weather_rng(derive_seed(spec.seed, "weather-noise"));
    Rng arrival_rng(derive_seed(spec.seed, "arrival"));
    Rng corrupt_rng(derive_seed(spec.seed, "corruption"));

    // Latent driver on t = -lag .. n-1, unit stationary variance.
    Eigen::VectorXd driver(n + lag);
    const double driver_phi = spec.weather_persistence;
    const double innov = std::sqrt(1.0 - driver_phi * driver_phi);
    driver[0] = driver_rng.normal();
    for (Eigen::Index i = 1; i < driver.size(); ++i) {
        driver[i] = driver_phi * driver[i - 1] + innov * driver_rng.normal();
    }
    auto driver_at = [&](Eigen::Index t) { return driver[t + lag]; };

    const Eigen::VectorXd regime = regime_path(spec);

    SyntheticSeries out;
    out.series = AlignedSeries::absent(
        spec.market_id, spec.crop_id,
        TradingCalendar::with_trading_days(spec.start_date, spec.n_days));
    out.true_price.resize(n);
    out.injected_missing = Mask::Constant(n, false);
    out.injected_outlier = Mask::Constant(n, false);

    const double phi = spec.ar1_coeff;
    double ar = spec.noise_std * noise_rng.normal() / std::sqrt(1.0 - phi * phi);
    double arrival_state = arrival_rng.normal();
    for (Eigen::Index t = 0; t < n; ++t) {
        if (t > 0) ar = phi * ar + spec.noise_std * noise_rng.normal();
        const double td = static_cast<double>(t);
        const double clean = spec.base_price + spec.trend_slope * td +
                             spec.seasonal_amplitude * std::sin(two_pi * td / spec.seasonal_period) +
                             ar + spec.weather_coupling * driver_at(t - lag) + regime[t];
        out.true_price[t] = std::max(kPriceFloor, clean);

        const double w = driver_at(t);
        const double season = std::sin(two_pi * td / kYear);
        out.series.temp[t] = 26.0 + 3.0 * season + 2.0 * w + 0.5 * weather_rng.normal();
        out.series.humidity[t] =
            std::clamp(65.0 - 10.0 * season + 8.0 * w + 3.0 * weather_rng.normal(), 0.0, 100.0);
        out.series.rainfall[t] =
            std::max(0.0, 4.0 - 2.0 * season + 3.0 * w + 2.0 * weather_rng.normal());

        arrival_state = 0.8 * arrival_state + 0.6 * arrival_rng.normal();
        out.series.arrival[t] = std::max(0.0, spec.base_arrival * (1.0 + 0.15 * arrival_state));

        // Always draw all three numbers so the streams stay aligned across rates.
        const double u_missing = corrupt_rng.uniform();
        const double u_outlier = corrupt_rng.uniform();
        const double u_coin = corrupt_rng.uniform();
        double observed = out.true_price[t];
        if (u_missing < spec.missing_rate) {
            out.injected_missing[t] = true;
            out.series.price[t] = kAbsent;
            out.series.arrival[t] = kAbsent;
            continue;
        }
        if (u_outlier < spec.outlier_rate) {
            out.injected_outlier[t] = true;
            observed = u_coin < 0.5 ? observed * spec.outlier_scale : observed / spec.outlier_scale;
        }
        out.series.price[t] = observed;
    }
    return out;
}

std::vector<SyntheticSeries> generate_market_panel(const SyntheticSpec& crop_spec,
                                                   std::size_t n_markets) {
    std::vector<SyntheticSeries> out;
    out.reserve(n_markets);
    for (std::size_t i = 0; i < n_markets; ++i) {
        SyntheticSpec s = crop_spec;
        s.seed = derive_seed(crop_spec.seed, "market", i);
        Rng level(derive_seed(s.seed, "level"));
        s.base_price = crop_spec.base_price * level.uniform(0.85, 1.15);
        char id[24];
        std::snprintf(id, sizeof id, "M%02zu", i + 1);
        s.market_id = id;
        out.push_back(generate_synthetic(s));
    }
    return out;
}

}  // namespace cropcast
