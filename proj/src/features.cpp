#include "cropcast/features.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>

#include <unsupported/Eigen/FFT>

#include "cropcast/error.hpp"

namespace cropcast {

FeatureConfig FeatureConfig::paper13() {
    FeatureConfig cfg;
    cfg.include_month = false;
    return cfg;
}

void FeatureConfig::validate() const {
    auto fail = [](const std::string& what) { throw ValidationError("feature config: " + what); };
    if (k < 1) fail("k must be >= 1");
    if (horizon < 1) fail("horizon must be >= 1");
    for (auto m : fft_retained) if (m < 1) fail("fft retention counts must be >= 1");
    for (auto w : sma_windows) if (w < 1) fail("moving-average windows must be >= 1");
    for (auto c : ema_coms) if (!(c >= 0.0)) fail("EMA centre of mass must be >= 0");
    if (mstd_window < 1) fail("moving-std window must be >= 1");
    if (macd_fast < 1 || macd_slow < 1) fail("MACD spans must be >= 1");
}

Eigen::VectorXd fft_smooth(const Eigen::Ref<const Eigen::VectorXd>& values, std::size_t n_retained) {
    const Eigen::Index n = values.size();
    if (n == 0) throw InsufficientDataError("fft_smooth of an empty sequence");
    if (n_retained < 1) throw DomainError("fft_smooth must retain at least one frequency");
    if (static_cast<Eigen::Index>(n_retained) >= n) return values;

    Eigen::FFT<double> fft;
    const Eigen::VectorXd input = values;
    Eigen::VectorXcd spectrum;
    fft.fwd(spectrum, input);
    const auto m = static_cast<Eigen::Index>(n_retained);
    for (Eigen::Index f = 0; f < n; ++f) {
        const bool kept = f < m || n - f < m;
        if (!kept) spectrum[f] = 0.0;
    }
    Eigen::VectorXcd back;
    fft.inv(back, spectrum);
    return back.real();
}

Eigen::MatrixXd causal_fft_columns(const Eigen::Ref<const Eigen::VectorXd>& values,
                                   const std::vector<std::size_t>& retained,
                                   std::size_t first_row, const Eigen::MatrixXd* previous) {
    const Eigen::Index n = values.size();
    const auto cols = static_cast<Eigen::Index>(retained.size());
    Eigen::MatrixXd out(n, cols);
    const auto first = static_cast<Eigen::Index>(std::min<std::size_t>(first_row, n));
    if (first > 0) {
        if (previous == nullptr || previous->rows() < first || previous->cols() != cols) {
            throw ShapeError("causal FFT reuse needs a previous block with enough rows");
        }
        out.topRows(first) = previous->topRows(first);
    }
    if (cols == 0) return out;

    std::vector<Eigen::Index> order(retained.size());
    for (std::size_t c = 0; c < retained.size(); ++c) order[c] = static_cast<Eigen::Index>(c);
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return retained[a] < retained[b]; });
    const auto max_m = static_cast<Eigen::Index>(*std::max_element(retained.begin(), retained.end()));

    std::vector<double> cosines;
    for (Eigen::Index j = first; j < n; ++j) {
        // Smoothed prefix x[0..j] evaluated at its last index:
        // y = (1/N) [sum x + sum_f c_f sum_t x_t cos(2 pi f (t + 1) / N)],
        // c_f = 2 below Nyquist and 1 at Nyquist.
        const Eigen::Index len = j + 1;
        cosines.resize(static_cast<std::size_t>(len));
        for (Eigen::Index k = 0; k < len; ++k) {
            cosines[static_cast<std::size_t>(k)] =
                std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(len));
        }
        const auto x = values.head(len);
        double acc = x.sum();
        Eigen::Index f = 1;
        std::size_t next = 0;
        const Eigen::Index top = std::min<Eigen::Index>(max_m - 1, len / 2);
        auto emit_through = [&](Eigen::Index last_f) {
            while (next < order.size() &&
                   std::min<Eigen::Index>(static_cast<Eigen::Index>(retained[order[next]]) - 1,
                                          len / 2) <= last_f) {
                out(j, order[next]) = acc / static_cast<double>(len);
                ++next;
            }
        };
        emit_through(0);
        for (; f <= top; ++f) {
            double s = 0.0;
            Eigen::Index idx = f % len;
            for (Eigen::Index t = 0; t < len; ++t) {
                s += x[t] * cosines[static_cast<std::size_t>(idx)];
                idx += f;
                if (idx >= len) idx -= len;
            }
            const bool nyquist = (len % 2 == 0) && (2 * f == len);
            acc += (nyquist ? 1.0 : 2.0) * s;
            emit_through(f);
        }
        emit_through(len);
    }
    return out;
}

Eigen::MatrixXd indicators(const Eigen::Ref<const Eigen::VectorXd>& values,
                           const FeatureConfig& cfg) {
    const Eigen::Index n = values.size();
    const auto cols = static_cast<Eigen::Index>(cfg.sma_windows.size() + cfg.ema_coms.size() + 2);
    Eigen::MatrixXd out(n, cols);
    Eigen::Index c = 0;
    for (auto w : cfg.sma_windows) out.col(c++) = moving_average(values, w);
    for (auto com : cfg.ema_coms) out.col(c++) = exponential_average(values, alpha_from_com(com));
    out.col(c++) = moving_std(values, cfg.mstd_window);
    out.col(c++) =
        exponential_average(values, alpha_from_span(static_cast<double>(cfg.macd_fast))) -
        exponential_average(values, alpha_from_span(static_cast<double>(cfg.macd_slow)));
    return out;
}

std::optional<std::size_t> FeatureFrame::column_index(const std::string& name) const {
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) return std::nullopt;
    return static_cast<std::size_t>(it - columns.begin());
}

namespace {

std::string trim_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

}  // namespace

std::vector<std::string> feature_columns(const FeatureConfig& cfg) {
    std::vector<std::string> cols{"price", "arrival"};
    if (cfg.include_weather) {
        cols.insert(cols.end(), {"temp", "humidity", "rainfall"});
    }
    if (cfg.include_quality) {
        cols.insert(cols.end(), {"missing", "outlier"});
        for (auto m : cfg.fft_retained) cols.push_back("ft" + std::to_string(m));
        if (cfg.include_day) cols.push_back("day");
        if (cfg.include_month) cols.push_back("month");
        for (auto w : cfg.sma_windows) cols.push_back("sma" + std::to_string(w));
        for (auto com : cfg.ema_coms) cols.push_back("ema" + trim_number(com));
        cols.push_back("mstd" + std::to_string(cfg.mstd_window));
        cols.push_back("macd");
    }
    return cols;
}

FeatureFrame build_feature_frame(const AlignedSeries& series, const QualityReport& report,
                                 const FeatureConfig& cfg, const FrameOptions& options) {
    cfg.validate();
    series.check_shape();
    const auto n = static_cast<Eigen::Index>(series.size());
    if (report.missing_mask.size() != n || report.outlier_mask.size() != n) {
        throw ShapeError("quality masks do not match the series length");
    }
    if (series.price.hasNaN() || series.arrival.hasNaN()) {
        throw DomainError("feature frame needs an imputed series (absent price or arrival)");
    }
    if (cfg.include_weather &&
        (series.temp.hasNaN() || series.humidity.hasNaN() || series.rainfall.hasNaN())) {
        throw DomainError("weather features requested but weather columns have gaps");
    }

    FeatureFrame f;
    f.columns = feature_columns(cfg);
    f.days = series.calendar.days();
    f.price = series.price;
    f.raw.resize(n, static_cast<Eigen::Index>(f.columns.size()));
    Eigen::Index c = 0;
    f.raw.col(c++) = series.price;
    f.raw.col(c++) = series.arrival;
    if (cfg.include_weather) {
        f.raw.col(c++) = series.temp;
        f.raw.col(c++) = series.humidity;
        f.raw.col(c++) = series.rainfall;
    }
    if (cfg.include_quality) {
        f.raw.col(c++) = report.missing_mask.cast<double>();
        f.raw.col(c++) = report.outlier_mask.cast<double>();
        const auto n_ft = static_cast<Eigen::Index>(cfg.fft_retained.size());
        if (options.fft_columns != nullptr) {
            if (options.fft_columns->rows() != n || options.fft_columns->cols() != n_ft) {
                throw ShapeError("precomputed FFT columns have the wrong shape");
            }
            f.raw.middleCols(c, n_ft) = *options.fft_columns;
        } else {
            f.raw.middleCols(c, n_ft) = causal_fft_columns(series.price, cfg.fft_retained);
        }
        c += n_ft;
        if (cfg.include_day || cfg.include_month) {
            for (Eigen::Index i = 0; i < n; ++i) {
                const CivilDate d = civil_date(f.days[static_cast<std::size_t>(i)]);
                Eigen::Index cc = c;
                if (cfg.include_day) f.raw(i, cc++) = d.day;
                if (cfg.include_month) f.raw(i, cc++) = d.month;
            }
            c += (cfg.include_day ? 1 : 0) + (cfg.include_month ? 1 : 0);
        }
        const Eigen::MatrixXd si = indicators(series.price, cfg);
        f.raw.middleCols(c, si.cols()) = si;
        c += si.cols();
    }

    f.fit_rows = std::min<std::size_t>(options.fit_rows.value_or(series.size()), series.size());
    const auto fit = static_cast<Eigen::Index>(f.fit_rows);
    f.mean = Eigen::RowVectorXd::Zero(f.raw.cols());
    f.scale = Eigen::RowVectorXd::Ones(f.raw.cols());
    if (cfg.standardize && fit > 0) {
        const auto block = f.raw.topRows(fit);
        f.mean = block.colwise().mean();
        for (Eigen::Index j = 0; j < f.raw.cols(); ++j) {
            const double sd =
                std::sqrt((block.col(j).array() - f.mean[j]).square().sum() / static_cast<double>(fit));
            f.scale[j] = sd > 1e-12 * std::max(1.0, std::abs(f.mean[j])) ? sd : 1.0;
        }
        f.values = (f.raw.rowwise() - f.mean).array().rowwise() / f.scale.array();
        f.price_mean = f.mean[0];
        f.price_scale = f.scale[0];
    } else {
        f.values = f.raw;
    }
    return f;
}

SupervisedSet make_supervised(const FeatureFrame& frame, std::size_t k, std::size_t horizon) {
    if (k < 1 || horizon < 1) throw DomainError("k and horizon must be >= 1");
    const std::size_t n = frame.size();
    if (n < k + horizon) {
        throw InsufficientDataError("frame of " + std::to_string(n) + " days is shorter than k + horizon = " +
                                    std::to_string(k + horizon));
    }
    const std::size_t rows = n - k - horizon + 1;
    const auto w = static_cast<Eigen::Index>(frame.width());
    SupervisedSet s;
    s.inputs.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(k) * w);
    s.targets.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(horizon));
    s.issue_rows.resize(rows);
    s.target_mean = frame.price_mean;
    s.target_scale = frame.price_scale;
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t i = r + k - 1;
        s.issue_rows[r] = i;
        s.inputs.row(static_cast<Eigen::Index>(r)) = make_input_row(frame, i, k);
        s.targets.row(static_cast<Eigen::Index>(r)) =
            frame.price.segment(static_cast<Eigen::Index>(i + 1), static_cast<Eigen::Index>(horizon))
                .transpose();
    }
    return s;
}

Eigen::RowVectorXd make_input_row(const FeatureFrame& frame, std::size_t i, std::size_t k) {
    if (k < 1 || i + 1 < k || i >= frame.size()) {
        throw IndexError("issue day " + std::to_string(i) + " has no full window of " +
                         std::to_string(k) + " days");
    }
    const auto w = static_cast<Eigen::Index>(frame.width());
    Eigen::RowVectorXd row(static_cast<Eigen::Index>(k) * w);
    for (std::size_t d = 0; d < k; ++d) {
        row.segment(static_cast<Eigen::Index>(d) * w, w) =
            frame.values.row(static_cast<Eigen::Index>(i + 1 - k + d));
    }
    return row;
}

Eigen::MatrixXd make_sequence_input(const FeatureFrame& frame, std::size_t i, std::size_t k) {
    if (k < 1 || i + 1 < k || i >= frame.size()) {
        throw IndexError("issue day " + std::to_string(i) + " has no full window of " +
                         std::to_string(k) + " days");
    }
    return frame.values.middleRows(static_cast<Eigen::Index>(i + 1 - k), static_cast<Eigen::Index>(k));
}

}  // namespace cropcast
