#include <algorithm>
#include <vector>

#include <gtest/gtest.h>

#include "cropcast/error.hpp"
#include "cropcast/quality.hpp"
#include "cropcast/rng.hpp"
#include "cropcast/spline.hpp"
#include "cropcast/synthetic.hpp"
#include "test_util.hpp"

using namespace cropcast;

namespace {

/// Quartile straight from the definition on a sorted copy.
double brute_quartile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = (static_cast<double>(v.size()) - 1.0) * q;
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= v.size()) return v[lo];
    return v[lo] + (pos - static_cast<double>(lo)) * (v[lo + 1] - v[lo]);
}

AlignedSeries with_prices(const Eigen::VectorXd& price) {
    auto cal = TradingCalendar::with_trading_days(16801, static_cast<std::size_t>(price.size()));
    AlignedSeries s = AlignedSeries::absent("M1", "tomato", cal);
    s.price = price;
    return s;
}

}  // namespace

TEST(Quantile, LinearInterpolation) {
    Eigen::VectorXd v(5);
    v << 13, 10, 50, 11, 12;
    EXPECT_DOUBLE_EQ(quantile(v, 0.25), 11.0);
    EXPECT_DOUBLE_EQ(quantile(v, 0.75), 13.0);
    EXPECT_DOUBLE_EQ(quantile(v, 0.5), 12.0);
    Eigen::VectorXd w(4);
    w << 1, 2, 3, 4;
    EXPECT_DOUBLE_EQ(quantile(w, 0.25), 1.75);
    EXPECT_THROW(quantile(Eigen::VectorXd(0), 0.5), InsufficientDataError);
}

TEST(Outliers, WorkedExample) {
    Eigen::VectorXd v(5);
    v << 10, 11, 12, 13, 50;
    const IqrBounds b = iqr_bounds(v);
    EXPECT_DOUBLE_EQ(b.lower, 9.0);
    EXPECT_DOUBLE_EQ(b.upper, 15.0);
    const Mask m = detect_outliers_iqr(v);
    EXPECT_EQ(m.count(), 1);
    EXPECT_TRUE(m[4]);
}

TEST(Outliers, ConstantAndHugeMultiplier) {
    EXPECT_EQ(detect_outliers_iqr(Eigen::VectorXd::Constant(20, 3.0)).count(), 0);
    EXPECT_EQ(detect_outliers_iqr(test::gaussian(200, 3), 1e6).count(), 0);
}

TEST(Outliers, MatchesBruteForceOracle) {
    Rng sizes(derive_seed(1, "sizes"));
    for (std::uint64_t trial = 0; trial < 1000; ++trial) {
        const auto n = static_cast<Eigen::Index>(1 + sizes.below(200));
        Eigen::VectorXd v = test::gaussian(n, derive_seed(7, "iqr", trial));
        if (trial % 3 == 0) v = v.array().round();  // ties
        std::vector<double> copy(v.data(), v.data() + n);
        const double q1 = brute_quartile(copy, 0.25);
        const double q3 = brute_quartile(copy, 0.75);
        const double iqr = q3 - q1;
        const Mask m = detect_outliers_iqr(v, 1.0);
        for (Eigen::Index i = 0; i < n; ++i) {
            const bool expect = v[i] < q1 - iqr || v[i] > q3 + iqr;
            ASSERT_EQ(m[i], expect) << "trial " << trial << " index " << i;
        }
    }
}

TEST(Outliers, MonotoneInMultiplier) {
    const Eigen::VectorXd v = test::gaussian(300, 11);
    const Mask loose = detect_outliers_iqr(v, 2.0);
    const Mask tight = detect_outliers_iqr(v, 0.5);
    EXPECT_TRUE((!loose || tight).all());
}

TEST(Missing, RunsAndFractions) {
    Eigen::VectorXd p = Eigen::VectorXd::Constant(60, 100.0);
    p[10] = p[11] = p[47] = kAbsent;
    const AlignedSeries s = with_prices(p);
    const Mask m = detect_missing(s);
    EXPECT_EQ(m.count(), 3);
    EXPECT_TRUE(m[10] && m[11] && m[47]);
    EXPECT_EQ(max_run(m), 2u);
    EXPECT_EQ(detect_missing(with_prices(Eigen::VectorXd::Constant(60, 1.0))).count(), 0);
}

TEST(Spline, ReproducesCubicsAndLines) {
    Eigen::VectorXd x(6), y(6);
    x << 0, 1, 2, 4, 5, 7;
    y = 3.0 * x.array() - 2.0;
    NaturalCubicSpline<double> s(x, y);
    EXPECT_NEAR(s(3.0), 7.0, 1e-12);
    EXPECT_NEAR(s(6.5), 17.5, 1e-12);
    EXPECT_NEAR(s.second_derivatives()[0], 0.0, 1e-15);
    EXPECT_NEAR(s.second_derivatives()[5], 0.0, 1e-15);
}

TEST(Impute, CollinearMiddle) {
    Eigen::VectorXd p(7);
    p << 8, 9, 10, kAbsent, 12, 13, 14;
    const AlignedSeries out = impute_spline(with_prices(p), detect_missing(with_prices(p)));
    EXPECT_NEAR(out.price[3], 11.0, 1e-12);
    Eigen::VectorXd q(5);
    q << 10, kAbsent, 14, 16, 18;
    EXPECT_NEAR(impute_spline(with_prices(q), detect_missing(with_prices(q))).price[1], 12.0, 1e-12);
}

TEST(Impute, EdgesUseNearestValue) {
    Eigen::VectorXd p(8);
    p << kAbsent, kAbsent, 5, 6, 8, 7, kAbsent, kAbsent;
    const auto s = with_prices(p);
    const AlignedSeries out = impute_spline(s, detect_missing(s));
    EXPECT_DOUBLE_EQ(out.price[0], 5.0);
    EXPECT_DOUBLE_EQ(out.price[1], 5.0);
    EXPECT_DOUBLE_EQ(out.price[7], 7.0);
}

TEST(Impute, TooFewKnots) {
    Eigen::VectorXd p = Eigen::VectorXd::Constant(10, kAbsent);
    p[1] = 1;
    p[4] = 2;
    p[8] = 3;
    const auto s = with_prices(p);
    EXPECT_THROW(impute_spline(s, detect_missing(s)), InsufficientDataError);
}

TEST(Impute, IdentityWithoutGaps) {
    const AlignedSeries s = test::clean_series(200, 3);
    EXPECT_TRUE(impute_spline(s, detect_missing(s)) == s);
}

TEST(Impute, ObservedUntouchedIdempotentAndBounded) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SyntheticSpec spec;
        spec.n_days = 400;
        spec.seasonal_amplitude = 300;
        spec.seasonal_period = 90;
        spec.noise_std = 30;
        spec.ar1_coeff = 0.6;
        spec.missing_rate = 0.05;
        spec.seed = seed;
        const AlignedSeries s = generate_synthetic(spec).series;
        const Mask miss = detect_missing(s);
        const AlignedSeries once = impute_spline(s, miss);
        const AlignedSeries twice = impute_spline(once, detect_missing(once));
        EXPECT_TRUE(once == twice);
        EXPECT_FALSE(detect_missing(once).any());
        Eigen::VectorXd observed(s.size() - static_cast<std::size_t>(miss.count()));
        for (Eigen::Index i = 0, j = 0; i < s.price.size(); ++i) {
            if (miss[i]) continue;
            EXPECT_EQ(once.price[i], s.price[i]);
            observed[j++] = s.price[i];
        }
        const IqrBounds b = iqr_bounds(observed);
        const double iqr = b.q3 - b.q1;
        EXPECT_GE(once.price.minCoeff(), observed.minCoeff() - iqr);
        EXPECT_LE(once.price.maxCoeff(), observed.maxCoeff() + iqr);
    }
}

TEST(QualityReport, CleanSeries) {
    SyntheticSpec spec;
    spec.n_days = 200;
    spec.seed = 2;
    const QualityReport r = quality_report(generate_synthetic(spec).series);
    EXPECT_EQ(r.missing_fraction, 0.0);
    EXPECT_EQ(r.outlier_fraction, 0.0);
}

TEST(QualityReport, MissingFractionTracksGenerator) {
    SyntheticSpec spec;
    spec.n_days = 2000;
    spec.noise_std = 10;
    spec.missing_rate = 0.05;
    spec.seed = 17;
    const auto g = generate_synthetic(spec);
    const QualityReport r = quality_report(g.series);
    const double injected = static_cast<double>(g.injected_missing.count()) / 2000.0;
    EXPECT_NEAR(r.missing_fraction, injected, 0.01);
    EXPECT_EQ(r.missing_fraction, static_cast<double>(r.missing_mask.count()) / 2000.0);
    EXPECT_EQ(r.outlier_fraction, static_cast<double>(r.outlier_mask.count()) / 2000.0);
}

TEST(QualityReport, AllAbsent) {
    const QualityReport r = quality_report(with_prices(Eigen::VectorXd::Constant(40, kAbsent)));
    EXPECT_EQ(r.missing_fraction, 1.0);
    EXPECT_EQ(r.max_consecutive_missing, 40u);
    EXPECT_TRUE(r.outlier_error.has_value());
    EXPECT_FALSE(r.outlier_mask.any());
}
