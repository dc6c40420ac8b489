#ifndef CROPCAST_SYNTHETIC_HPP
#define CROPCAST_SYNTHETIC_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "cropcast/series.hpp"

namespace cropcast {

/// Parameters of the seeded price/weather generator.
///
/// price(t) = max(eps, base + slope*t + amplitude*sin(2*pi*t/period) + ar1(t)
///                     + weather_coupling*driver(t - weather_lag) + regime(t))
///
/// `driver` is a latent AR(1) process that also moves temperature,
/// humidity and rainfall, so present weather carries information about future
/// prices. `regime` is a sequence of alternating up/down segments of linear
/// drift. After the clean price is built, missing days and outliers are
/// injected independently per day.
struct SyntheticSpec {
    std::size_t n_days = 1125;
    double base_price = 1500.0;
    double trend_slope = 0.0;          // currency per trading day
    double seasonal_amplitude = 0.0;   // currency
    double seasonal_period = 313.0;    // trading days
    double noise_std = 0.0;            // innovation std of the AR(1) noise
    double ar1_coeff = 0.0;            // in (-1, 1)
    double missing_rate = 0.0;
    double outlier_rate = 0.0;
    double outlier_scale = 3.0;        // multiply or divide, by seeded coin
    std::uint64_t seed = 0;

    Day start_date = 16801;            // 2016-01-01
    std::string market_id = "M01";
    std::string crop_id = "tomato";
    double weather_coupling = 0.0;
    std::size_t weather_lag = 30;
    double weather_persistence = 0.97; // AR(1) coefficient of the weather driver
    std::size_t regime_length = 0;     // mean segment length; 0 disables
    double regime_slope = 0.0;
    std::uint64_t regime_seed = 0;     // shared by markets of one crop
    double base_arrival = 500.0;
};

/// Throws ValidationError when an invariant of the spec is violated.
void validate(const SyntheticSpec& spec);

struct SyntheticSeries {
    AlignedSeries series;
    Eigen::VectorXd true_price;  // before corruption
    Mask injected_missing;
    Mask injected_outlier;
};

inline constexpr double kPriceFloor = 1e-3;

/// Identical spec (including seed) gives bit-identical output.
SyntheticSeries generate_synthetic(const SyntheticSpec& spec);

/// `n_markets` markets of one crop. Market i uses seed derive_seed(seed, "market", i),
/// a base price scaled by a seeded factor in [0.85, 1.15], and id "M01", "M02", ...;
/// all markets share the regime schedule.
std::vector<SyntheticSeries> generate_market_panel(const SyntheticSpec& crop_spec,
                                                   std::size_t n_markets);

}  // namespace cropcast

#endif  // CROPCAST_SYNTHETIC_HPP
