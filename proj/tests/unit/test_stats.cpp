#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "cropcast/error.hpp"
#include "cropcast/stats.hpp"
#include "test_util.hpp"

using namespace cropcast;

namespace {

Eigen::VectorXd cumsum(const Eigen::VectorXd& x) {
    Eigen::VectorXd c(x.size());
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) c[i] = s += x[i];
    return c;
}

}  // namespace

// Reference values computed offline with statsmodels 0.14:
// adfuller(x, maxlag=14, regression="c", autolag="t-stat") and
// kpss(x, regression="c", nlags=4).
TEST(Adf, MatchesReferenceOnHashNoise) {
    const AdfResult r = adf_test(test::hash_series(200));
    EXPECT_NEAR(r.stat, -2.5182599636974685, 1e-8);
    EXPECT_EQ(r.lags, 14u);
    EXPECT_EQ(r.nobs, 185u);
    EXPECT_NEAR(r.crit_5pct, -2.8772932777920364, 1e-10);
    EXPECT_FALSE(r.reject_unit_root);
}

TEST(Adf, MatchesReferenceOnHashWalk) {
    const AdfResult r = adf_test(cumsum(test::hash_series(200)));
    EXPECT_NEAR(r.stat, -1.2863708054091048, 1e-8);
    EXPECT_EQ(r.lags, 0u);
    EXPECT_EQ(r.nobs, 199u);
}

TEST(Kpss, MatchesReference) {
    const KpssResult a = kpss_test(test::hash_series(200));
    EXPECT_NEAR(a.stat, 0.2802564371880299, 1e-10);
    EXPECT_EQ(a.bandwidth, 4u);
    EXPECT_FALSE(a.reject_stationarity);
    const KpssResult b = kpss_test(cumsum(test::hash_series(200)));
    EXPECT_NEAR(b.stat, 1.8770793194066178, 1e-9);
    EXPECT_TRUE(b.reject_stationarity);
}

TEST(Adf, SeededBehaviour) {
    EXPECT_TRUE(adf_test(test::gaussian(500, 1)).reject_unit_root);
    EXPECT_FALSE(adf_test(test::random_walk(500, 1)).reject_unit_root);
    EXPECT_THROW(adf_test(Eigen::VectorXd::Constant(100, 4.0)), NumericalError);
    EXPECT_THROW(adf_test(test::gaussian(29, 1)), InsufficientDataError);
}

TEST(Adf, CriticalValueApproachesLargeSample) {
    EXPECT_NEAR(adf_crit_5pct(100000), -2.8621, 1e-3);
    EXPECT_LT(adf_crit_5pct(50), adf_crit_5pct(500));
}

TEST(Kpss, SeededBehaviour) {
    EXPECT_FALSE(kpss_test(test::gaussian(500, 2)).reject_stationarity);
    EXPECT_TRUE(kpss_test(test::random_walk(500, 2)).reject_stationarity);
    const KpssResult flat = kpss_test(Eigen::VectorXd::Constant(60, 3.0));
    EXPECT_EQ(flat.stat, 0.0);
    EXPECT_FALSE(flat.reject_stationarity);
    EXPECT_THROW(kpss_test(test::gaussian(29, 1)), InsufficientDataError);
    for (std::uint64_t s = 0; s < 20; ++s) EXPECT_GE(kpss_test(test::gaussian(80, s)).stat, 0.0);
}

TEST(Classify, AllFourCases) {
    EXPECT_EQ(classify_stationarity(true, false), Stationarity::StrictStationary);
    EXPECT_EQ(classify_stationarity(false, true), Stationarity::NonStationary);
    EXPECT_EQ(classify_stationarity(false, false), Stationarity::TrendStationary);
    EXPECT_EQ(classify_stationarity(true, true), Stationarity::DifferenceStationary);
    EXPECT_EQ(stationarity(test::gaussian(500, 3)).classification, Stationarity::StrictStationary);
    EXPECT_EQ(stationarity(test::random_walk(500, 3)).classification, Stationarity::NonStationary);
}

TEST(Decompose, PureAdditiveSignal) {
    for (std::size_t period : {6u, 7u, 12u}) {
        const Eigen::Index n = 120;
        Eigen::VectorXd pattern = test::gaussian(static_cast<Eigen::Index>(period), period);
        pattern.array() -= pattern.mean();
        Eigen::VectorXd x(n);
        for (Eigen::Index t = 0; t < n; ++t) x[t] = 0.7 * t + 5.0 + pattern[t % static_cast<Eigen::Index>(period)];
        const Decomposition d = seasonal_decompose(x, period);
        for (Eigen::Index t = 0; t < n; ++t) {
            if (std::isnan(d.residual[t])) continue;
            EXPECT_LT(std::abs(d.residual[t]), 1e-6);
            EXPECT_NEAR(d.trend[t] + d.seasonal[t] + d.residual[t], x[t], 1e-9 * std::abs(x[t]));
        }
        EXPECT_NEAR(d.seasonal.head(static_cast<Eigen::Index>(period)).sum(), 0.0, 1e-9);
        EXPECT_LT(residual_stats(d).std, 1e-6);
    }
}

TEST(Decompose, EdgesUndefinedAndErrors) {
    const Decomposition d = seasonal_decompose(test::gaussian(40, 4), 6);
    EXPECT_TRUE(std::isnan(d.trend[0]));
    EXPECT_TRUE(std::isnan(d.trend[2]));
    EXPECT_FALSE(std::isnan(d.trend[3]));
    EXPECT_TRUE(std::isnan(d.trend[39]));
    EXPECT_THROW(seasonal_decompose(test::gaussian(11, 1), 6), InsufficientDataError);
}

TEST(ResidualStats, HandValues) {
    Decomposition d;
    d.residual.resize(4);
    d.residual << kAbsent, 1.0, -1.0, kAbsent;
    const ResidualStats r = residual_stats(d);
    EXPECT_DOUBLE_EQ(r.mean, 0.0);
    EXPECT_DOUBLE_EQ(r.std, std::numbers::sqrt2);
    EXPECT_EQ(r.count, 2u);
    d.residual = Eigen::VectorXd::Constant(5, 2.5);
    EXPECT_EQ(residual_stats(d).std, 0.0);
    d.residual = Eigen::VectorXd::Constant(1, 2.5);
    EXPECT_THROW(residual_stats(d), InsufficientDataError);
}

TEST(TrendScore, Examples) {
    Eigen::VectorXd flat(3), wave(3), up(3);
    flat << 5, 5, 5;
    wave << 100, 110, 99;
    up << 1, 2, 3;
    EXPECT_EQ(trend_score(flat).polarity, TrendPolarity::Negative);
    EXPECT_EQ(trend_score(wave).score, 0.0);
    EXPECT_EQ(trend_score(wave).polarity, TrendPolarity::Negative);
    EXPECT_DOUBLE_EQ(trend_score(up).score, 1.5);
    EXPECT_EQ(trend_score(up).polarity, TrendPolarity::Positive);
    Eigen::VectorXd bad(3);
    bad << 1, 0, 2;
    EXPECT_THROW(trend_score(bad), DomainError);
    EXPECT_THROW(trend_score(Eigen::VectorXd::Constant(1, 1.0)), InsufficientDataError);
}

TEST(TrendScore, ScaleInvariantPolarity) {
    for (std::uint64_t s = 0; s < 100; ++s) {
        Eigen::VectorXd w = test::gaussian(7, s).array().exp() + 0.1;
        for (double c : {0.01, 3.0, 1e4}) {
            EXPECT_EQ(trend_score(w).polarity, trend_score(Eigen::VectorXd(c * w)).polarity);
        }
    }
}
