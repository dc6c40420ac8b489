#ifndef CROPCAST_QUALITY_HPP
#define CROPCAST_QUALITY_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cropcast/error.hpp"
#include "cropcast/series.hpp"

namespace cropcast {

inline constexpr std::size_t kMinSplineKnots = 4;

/// Quantile by linear interpolation between order statistics at position
/// (n - 1) * q of the sorted values.
template <typename Derived>
typename Derived::Scalar quantile(const Eigen::DenseBase<Derived>& values, double q) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index n = values.size();
    if (n == 0) throw InsufficientDataError("quantile of an empty sequence");
    std::vector<Scalar> sorted(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) sorted[static_cast<std::size_t>(i)] = values.derived()(i);
    std::sort(sorted.begin(), sorted.end());
    const double pos = static_cast<double>(n - 1) * q;
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, static_cast<std::size_t>(n - 1));
    const Scalar frac = static_cast<Scalar>(pos - static_cast<double>(lo));
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

struct IqrBounds {
    double q1, q3, lower, upper;
};

/// Quartiles and the rejection band [q1 - m*iqr, q3 + m*iqr].
IqrBounds iqr_bounds(const Eigen::Ref<const Eigen::VectorXd>& values, double multiplier = 1.0);

/// True strictly outside the band. Values are never modified.
Mask detect_outliers_iqr(const Eigen::Ref<const Eigen::VectorXd>& values,
                         double multiplier = 1.0);

/// True exactly where the price is absent.
Mask detect_missing(const AlignedSeries& series);

/// Longest run of consecutive `true` entries.
std::size_t max_run(const Mask& mask);

/// Fills one column: natural cubic spline over the day index through the
/// observed points (those present and not flagged in `fill`), nearest observed
/// value on leading/trailing gaps. Throws InsufficientDataError with fewer than
/// `min_knots` observed points.
Eigen::VectorXd impute_column(const Eigen::VectorXd& column, const Mask& fill,
                              std::size_t min_knots = kMinSplineKnots);

/// Price positions flagged in `mask` (and absent ones) are replaced by the
/// spline; arrival and weather columns are filled the same way where absent.
/// Non-price columns are filled without the four-knot minimum; columns with no
/// observation at all stay absent.
AlignedSeries impute_spline(const AlignedSeries& series, const Mask& mask);

struct QualityReport {
    Mask missing_mask;
    Mask outlier_mask;
    double missing_fraction = 0.0;
    double outlier_fraction = 0.0;
    std::size_t max_consecutive_missing = 0;
    /// Set when the outlier stage could not run (imputation failed); the
    /// outlier mask is then all false.
    std::optional<std::string> outlier_error;
};

struct QualityOptions {
    double iqr_multiplier = 1.0;
};

/// Missing statistics on the raw series, outliers on the imputed prices.
QualityReport quality_report(const AlignedSeries& series, const QualityOptions& options = {});

}  // namespace cropcast

#endif  // CROPCAST_QUALITY_HPP
