#ifndef CROPCAST_FEATURES_HPP
#define CROPCAST_FEATURES_HPP

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cropcast/quality.hpp"
#include "cropcast/series.hpp"

namespace cropcast {

struct FeatureConfig {
    std::size_t k = 7;
    std::size_t horizon = 30;
    std::vector<std::size_t> fft_retained{3, 6, 9, 100};
    std::vector<std::size_t> sma_windows{3, 7};
    std::vector<double> ema_coms{0.25, 0.5};
    std::size_t mstd_window = 20;
    std::size_t macd_fast = 12;
    std::size_t macd_slow = 26;
    bool include_day = true;
    bool include_month = true;
    bool standardize = true;
    /// Family switches (price and arrival are always present).
    bool include_weather = true;
    bool include_quality = true;

    /// 13 quality columns per day: the default set without the month column.
    static FeatureConfig paper13();

    /// Throws ValidationError on a zero window, horizon, or k.
    void validate() const;
};

/// Removes every DFT coefficient with index >= n_retained (and its conjugate
/// partner) and transforms back.
Eigen::VectorXd fft_smooth(const Eigen::Ref<const Eigen::VectorXd>& values, std::size_t n_retained);

/// Column c, row j holds fft_smooth(values[0..j], retained[c])[j]: the smoothed
/// value at day j using only data up to day j. Rows before `first_row` are
/// copied from `previous` (which must have at least that many rows).
Eigen::MatrixXd causal_fft_columns(const Eigen::Ref<const Eigen::VectorXd>& values,
                                   const std::vector<std::size_t>& retained,
                                   std::size_t first_row = 0,
                                   const Eigen::MatrixXd* previous = nullptr);

/// Expanding-window mean during warm-up, then a trailing window.
template <typename Derived>
Eigen::VectorXd moving_average(const Eigen::MatrixBase<Derived>& x, std::size_t window) {
    const Eigen::Index n = x.size();
    const auto w = static_cast<Eigen::Index>(window);
    Eigen::VectorXd out(n);
    for (Eigen::Index t = 0; t < n; ++t) {
        const Eigen::Index len = std::min<Eigen::Index>(w, t + 1);
        out[t] = x.segment(t - len + 1, len).sum() / static_cast<double>(len);
    }
    return out;
}

/// Sample standard deviation over the trailing window (expanding during
/// warm-up; a single value has deviation 0).
template <typename Derived>
Eigen::VectorXd moving_std(const Eigen::MatrixBase<Derived>& x, std::size_t window) {
    const Eigen::Index n = x.size();
    const auto w = static_cast<Eigen::Index>(window);
    Eigen::VectorXd out(n);
    for (Eigen::Index t = 0; t < n; ++t) {
        const Eigen::Index len = std::min<Eigen::Index>(w, t + 1);
        if (len < 2) {
            out[t] = 0.0;
            continue;
        }
        const auto seg = x.segment(t - len + 1, len);
        const double mean = seg.sum() / static_cast<double>(len);
        out[t] = std::sqrt((seg.array() - mean).square().sum() / static_cast<double>(len - 1));
    }
    return out;
}

/// y_0 = x_0, y_t = y_{t-1} + alpha * (x_t - y_{t-1}).
template <typename Derived>
Eigen::VectorXd exponential_average(const Eigen::MatrixBase<Derived>& x, double alpha) {
    const Eigen::Index n = x.size();
    Eigen::VectorXd out(n);
    if (n == 0) return out;
    out[0] = x[0];
    for (Eigen::Index t = 1; t < n; ++t) out[t] = out[t - 1] + alpha * (x[t] - out[t - 1]);
    return out;
}

inline double alpha_from_com(double com) { return 1.0 / (1.0 + com); }
inline double alpha_from_span(double span) { return 2.0 / (span + 1.0); }

/// SMA per window, EMA per centre of mass, moving std, MACD (span EMAs).
/// Columns in that order; six with the default configuration.
Eigen::MatrixXd indicators(const Eigen::Ref<const Eigen::VectorXd>& values,
                           const FeatureConfig& cfg);

struct FrameOptions {
    /// Standardization is fitted on rows [0, fit_rows); default all rows.
    std::optional<std::size_t> fit_rows;
    /// Precomputed causal FFT columns for this series (see causal_fft_columns).
    const Eigen::MatrixXd* fft_columns = nullptr;
};

/// Per-day feature vectors. Column order:
/// price, arrival | temp, humidity, rainfall | missing, outlier, ft<m>...,
/// day, month, sma<w>..., ema<com>..., mstd<w>, macd.
struct FeatureFrame {
    std::vector<std::string> columns;
    std::vector<Day> days;
    Eigen::MatrixXd raw;        // causal, unstandardized
    Eigen::MatrixXd values;     // standardized copy of raw (or raw itself)
    Eigen::RowVectorXd mean;
    Eigen::RowVectorXd scale;
    Eigen::VectorXd price;      // imputed prices in currency (targets)
    double price_mean = 0.0;
    double price_scale = 1.0;
    std::size_t fit_rows = 0;

    std::size_t size() const { return days.size(); }
    std::size_t width() const { return columns.size(); }
    std::optional<std::size_t> column_index(const std::string& name) const;
};

std::vector<std::string> feature_columns(const FeatureConfig& cfg);

/// `series` must be fully imputed; `report` masks must match its length.
FeatureFrame build_feature_frame(const AlignedSeries& series, const QualityReport& report,
                                 const FeatureConfig& cfg, const FrameOptions& options = {});

struct SupervisedSet {
    Eigen::MatrixXd inputs;    // one row per issue day, k * width columns
    Eigen::MatrixXd targets;   // prices of the next `horizon` days, currency
    std::vector<std::size_t> issue_rows;
    double target_mean = 0.0;
    double target_scale = 1.0;

    Eigen::Index rows() const { return inputs.rows(); }
};

/// Row for issue day i concatenates day vectors i-k+1..i (oldest first);
/// its targets are prices i+1..i+horizon. Throws InsufficientDataError when
/// the frame is shorter than k + horizon.
SupervisedSet make_supervised(const FeatureFrame& frame, std::size_t k, std::size_t horizon);

/// Input row for issue day i (same layout as make_supervised).
Eigen::RowVectorXd make_input_row(const FeatureFrame& frame, std::size_t i, std::size_t k);

/// k x width matrix of day vectors i-k+1..i, oldest first.
Eigen::MatrixXd make_sequence_input(const FeatureFrame& frame, std::size_t i, std::size_t k);

}  // namespace cropcast

#endif  // CROPCAST_FEATURES_HPP
