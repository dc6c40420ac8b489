#ifndef CROPCAST_STATS_HPP
#define CROPCAST_STATS_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "cropcast/error.hpp"

namespace cropcast {

inline constexpr std::size_t kMinStationarityLength = 30;
inline constexpr double kKpssLevelCrit5 = 0.463;

struct AdfOptions {
    /// Overrides the Schwert maximum floor(12 * (n / 100)^0.25).
    std::optional<std::size_t> max_lag;
    /// |t| below this drops the highest lag (two-sided 10% normal quantile).
    double lag_t_threshold = 1.645;
};

struct AdfResult {
    double stat = 0.0;
    double crit_5pct = 0.0;
    bool reject_unit_root = false;
    std::size_t lags = 0;
    std::size_t nobs = 0;
};

/// Augmented Dickey-Fuller with intercept. The lag order starts at the Schwert
/// maximum and is reduced while the highest-lag coefficient is insignificant.
/// The 5% critical value is the MacKinnon (2010) constant-only response surface
/// at the regression sample size (about -2.86 for large samples).
AdfResult adf_test(const Eigen::Ref<const Eigen::VectorXd>& values, const AdfOptions& options = {});

/// 5% constant-only ADF critical value for `nobs` regression observations.
double adf_crit_5pct(std::size_t nobs);

struct KpssResult {
    double stat = 0.0;
    double crit_5pct = kKpssLevelCrit5;
    bool reject_stationarity = false;
    std::size_t bandwidth = 0;
};

/// Level-stationarity KPSS, Newey-West long-run variance with Bartlett weights
/// and bandwidth floor(4 * (n / 100)^0.25). A zero-variance input gives stat 0.
KpssResult kpss_test(const Eigen::Ref<const Eigen::VectorXd>& values,
                     std::optional<std::size_t> bandwidth = std::nullopt);

enum class Stationarity { NonStationary, StrictStationary, TrendStationary, DifferenceStationary };

std::string_view to_string(Stationarity s);

/// ADF rejects & KPSS not      -> strict stationary
/// ADF not     & KPSS rejects  -> non-stationary
/// neither rejects             -> trend stationary
/// both reject                 -> difference stationary
Stationarity classify_stationarity(bool adf_rejects_unit_root, bool kpss_rejects_stationarity);
inline Stationarity classify_stationarity(const AdfResult& adf, const KpssResult& kpss) {
    return classify_stationarity(adf.reject_unit_root, kpss.reject_stationarity);
}

struct StationarityResult {
    AdfResult adf;
    KpssResult kpss;
    Stationarity classification = Stationarity::NonStationary;
};

StationarityResult stationarity(const Eigen::Ref<const Eigen::VectorXd>& values);

/// Additive decomposition. `trend` and `residual` are NaN where the centered
/// moving average is undefined (first and last period/2 entries).
struct Decomposition {
    Eigen::VectorXd trend;
    Eigen::VectorXd seasonal;
    Eigen::VectorXd residual;
    std::size_t period = 0;
};

inline constexpr std::size_t kDefaultDecompositionPeriod = 6;

/// Trend: centered moving average of width `period` (2 x period with half
/// weights at the ends when even). Seasonal: per-phase mean of the detrended
/// values, shifted to sum to zero over a period. Residual: the remainder.
Decomposition seasonal_decompose(const Eigen::Ref<const Eigen::VectorXd>& values,
                                 std::size_t period = kDefaultDecompositionPeriod);

struct ResidualStats {
    double mean = 0.0;
    double std = 0.0;  // sample (n - 1) standard deviation
    std::size_t count = 0;
};

ResidualStats residual_stats(const Decomposition& d);

enum class TrendPolarity { Positive, Negative };

std::string_view to_string(TrendPolarity p);

struct TrendLabel {
    TrendPolarity polarity = TrendPolarity::Negative;
    double score = 0.0;
};

inline constexpr std::size_t kTrendWindow = 7;

/// Sum of relative day-over-day increments; positive iff the sum is > 0, so
/// a zero score routes to the negative side.
template <typename Derived>
TrendLabel trend_score(const Eigen::DenseBase<Derived>& window) {
    const Eigen::Index k = window.size();
    if (k < 2) throw InsufficientDataError("trend score needs at least 2 prices");
    for (Eigen::Index i = 0; i < k; ++i) {
        if (!(window.derived()(i) > 0)) throw DomainError("trend score needs positive prices");
    }
    double score = 0.0;
    for (Eigen::Index i = 0; i + 1 < k; ++i) {
        const double prev = static_cast<double>(window.derived()(i));
        score += (static_cast<double>(window.derived()(i + 1)) - prev) / prev;
    }
    return {score > 0.0 ? TrendPolarity::Positive : TrendPolarity::Negative, score};
}

}  // namespace cropcast

#endif  // CROPCAST_STATS_HPP
