#include "cropcast/quality.hpp"

#include "cropcast/spline.hpp"

namespace cropcast {

IqrBounds iqr_bounds(const Eigen::Ref<const Eigen::VectorXd>& values, double multiplier) {
    if (values.size() == 0) throw InsufficientDataError("IQR of an empty sequence");
    if (values.hasNaN()) throw DomainError("IQR input contains absent values; impute first");
    IqrBounds b{};
    b.q1 = quantile(values, 0.25);
    b.q3 = quantile(values, 0.75);
    const double iqr = b.q3 - b.q1;
    b.lower = b.q1 - multiplier * iqr;
    b.upper = b.q3 + multiplier * iqr;
    return b;
}

Mask detect_outliers_iqr(const Eigen::Ref<const Eigen::VectorXd>& values, double multiplier) {
    if (!(multiplier > 0.0)) throw DomainError("IQR multiplier must be positive");
    const IqrBounds b = iqr_bounds(values, multiplier);
    return values.array() < b.lower || values.array() > b.upper;
}

Mask detect_missing(const AlignedSeries& series) { return absent_mask(series.price); }

std::size_t max_run(const Mask& mask) {
    std::size_t best = 0, run = 0;
    for (Eigen::Index i = 0; i < mask.size(); ++i) {
        run = mask[i] ? run + 1 : 0;
        best = std::max(best, run);
    }
    return best;
}

Eigen::VectorXd impute_column(const Eigen::VectorXd& column, const Mask& fill,
                              std::size_t min_knots) {
    if (fill.size() != column.size()) throw ShapeError("mask length differs from series length");
    const Eigen::Index n = column.size();
    std::vector<double> xs, ys;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!fill[i] && !is_absent(column[i])) {
            xs.push_back(static_cast<double>(i));
            ys.push_back(column[i]);
        }
    }
    if (xs.size() < std::max<std::size_t>(min_knots, 1)) {
        throw InsufficientDataError("imputation needs at least " + std::to_string(min_knots) +
                                    " observed points, got " + std::to_string(xs.size()));
    }
    Eigen::VectorXd out = column;
    if (static_cast<Eigen::Index>(xs.size()) == n) return out;

    const Eigen::Map<const Eigen::VectorXd> kx(xs.data(), static_cast<Eigen::Index>(xs.size()));
    const Eigen::Map<const Eigen::VectorXd> ky(ys.data(), static_cast<Eigen::Index>(ys.size()));
    const double first = xs.front(), last = xs.back();
    if (xs.size() == 1) {
        out.setConstant(ys.front());
        return out;
    }
    const NaturalCubicSpline<double> spline(kx, ky);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!fill[i] && !is_absent(column[i])) continue;
        const double t = static_cast<double>(i);
        if (t < first) out[i] = ys.front();
        else if (t > last) out[i] = ys.back();
        else out[i] = spline(t);
    }
    return out;
}

namespace {

Eigen::VectorXd impute_optional(const Eigen::VectorXd& column) {
    const Mask none = Mask::Constant(column.size(), false);
    const Eigen::Index observed = column.size() - column.array().isNaN().count();
    if (observed == 0 || observed == column.size()) return column;
    if (observed >= static_cast<Eigen::Index>(kMinSplineKnots)) return impute_column(column, none);
    // Fewer than four observations: same interpolation without the knot minimum.
    return impute_column(column, none, 1);
}

}  // namespace

AlignedSeries impute_spline(const AlignedSeries& series, const Mask& mask) {
    series.check_shape();
    if (mask.size() != static_cast<Eigen::Index>(series.size())) {
        throw ShapeError("missing mask length differs from series length");
    }
    AlignedSeries out = series;
    out.price = impute_column(series.price, mask);
    out.arrival = impute_optional(series.arrival);
    out.temp = impute_optional(series.temp);
    out.humidity = impute_optional(series.humidity);
    out.rainfall = impute_optional(series.rainfall);
    return out;
}

QualityReport quality_report(const AlignedSeries& series, const QualityOptions& options) {
    series.check_shape();
    QualityReport r;
    const auto n = static_cast<double>(series.size());
    r.missing_mask = detect_missing(series);
    r.missing_fraction = n > 0 ? static_cast<double>(r.missing_mask.count()) / n : 0.0;
    r.max_consecutive_missing = max_run(r.missing_mask);
    r.outlier_mask = Mask::Constant(r.missing_mask.size(), false);
    try {
        const Eigen::VectorXd prices = impute_column(series.price, r.missing_mask);
        r.outlier_mask = detect_outliers_iqr(prices, options.iqr_multiplier);
        r.outlier_fraction = static_cast<double>(r.outlier_mask.count()) / n;
    } catch (const InsufficientDataError& e) {
        r.outlier_error = e.what();
    }
    return r;
}

}  // namespace cropcast
