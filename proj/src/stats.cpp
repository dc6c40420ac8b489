#include "cropcast/stats.hpp"

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "cropcast/series.hpp"

namespace cropcast {

namespace {

struct OlsFit {
    Eigen::VectorXd beta;
    Eigen::VectorXd se;
};

OlsFit ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    const Eigen::Index k = x.cols();
    if (x.rows() <= k) throw InsufficientDataError("regression has no residual degrees of freedom");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < k) throw NumericalError("singular regression (collinear or zero-variance regressor)");
    OlsFit fit;
    fit.beta = qr.solve(y);
    const Eigen::VectorXd resid = y - x * fit.beta;
    const double sigma2 = resid.squaredNorm() / static_cast<double>(x.rows() - k);
    if (!(sigma2 > 0.0)) throw NumericalError("regression fits exactly; t statistics undefined");
    const Eigen::MatrixXd xtx_inv =
        (x.transpose() * x).ldlt().solve(Eigen::MatrixXd::Identity(k, k));
    fit.se = (sigma2 * xtx_inv.diagonal().array()).sqrt();
    return fit;
}

// dy_t = a + g*y_{t-1} + sum_i b_i dy_{t-i}, using t = first..n-1.
OlsFit adf_regression(const Eigen::Ref<const Eigen::VectorXd>& y, std::size_t lags,
                      std::size_t first) {
    const Eigen::Index n = y.size();
    const auto p = static_cast<Eigen::Index>(lags);
    const auto t0 = static_cast<Eigen::Index>(first);
    const Eigen::Index rows = n - t0;
    Eigen::MatrixXd x(rows, 2 + p);
    Eigen::VectorXd dy(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const Eigen::Index t = t0 + r;
        dy[r] = y[t] - y[t - 1];
        x(r, 0) = 1.0;
        x(r, 1) = y[t - 1];
        for (Eigen::Index i = 1; i <= p; ++i) x(r, 1 + i) = y[t - i] - y[t - i - 1];
    }
    return ols(x, dy);
}

void require_length(Eigen::Index n, const char* test) {
    if (n < static_cast<Eigen::Index>(kMinStationarityLength)) {
        throw InsufficientDataError(std::string(test) + " needs at least " +
                                    std::to_string(kMinStationarityLength) + " values");
    }
}

}  // namespace

double adf_crit_5pct(std::size_t nobs) {
    const double t = static_cast<double>(nobs);
    return -2.86154 - 2.8903 / t - 4.234 / (t * t) - 40.040 / (t * t * t);
}

AdfResult adf_test(const Eigen::Ref<const Eigen::VectorXd>& values, const AdfOptions& options) {
    const Eigen::Index n = values.size();
    require_length(n, "ADF test");
    if (values.hasNaN()) throw DomainError("ADF input contains absent values");
    std::size_t max_lag = options.max_lag.value_or(static_cast<std::size_t>(
        std::floor(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25))));
    // Keep enough rows for the largest regression.
    max_lag = std::min<std::size_t>(max_lag, static_cast<std::size_t>(n) / 2 - 2);

    std::size_t lags = max_lag;
    while (lags > 0) {
        const OlsFit fit = adf_regression(values, lags, max_lag + 1);
        const auto last = static_cast<Eigen::Index>(1 + lags);
        if (std::abs(fit.beta[last] / fit.se[last]) >= options.lag_t_threshold) break;
        --lags;
    }
    const OlsFit fit = adf_regression(values, lags, lags + 1);
    AdfResult r;
    r.lags = lags;
    r.nobs = static_cast<std::size_t>(n) - lags - 1;
    r.stat = fit.beta[1] / fit.se[1];
    r.crit_5pct = adf_crit_5pct(r.nobs);
    r.reject_unit_root = r.stat < r.crit_5pct;
    return r;
}

KpssResult kpss_test(const Eigen::Ref<const Eigen::VectorXd>& values,
                     std::optional<std::size_t> bandwidth) {
    const Eigen::Index n = values.size();
    require_length(n, "KPSS test");
    if (values.hasNaN()) throw DomainError("KPSS input contains absent values");
    KpssResult r;
    r.bandwidth = bandwidth.value_or(static_cast<std::size_t>(
        std::floor(4.0 * std::pow(static_cast<double>(n) / 100.0, 0.25))));
    const Eigen::VectorXd e = values.array() - values.mean();
    const double nd = static_cast<double>(n);
    double lrv = e.squaredNorm() / nd;
    for (std::size_t s = 1; s <= r.bandwidth && static_cast<Eigen::Index>(s) < n; ++s) {
        const auto si = static_cast<Eigen::Index>(s);
        const double gamma = e.tail(n - si).dot(e.head(n - si)) / nd;
        lrv += 2.0 * (1.0 - static_cast<double>(s) / static_cast<double>(r.bandwidth + 1)) * gamma;
    }
    double partial = 0.0, eta = 0.0;
    for (Eigen::Index t = 0; t < n; ++t) {
        partial += e[t];
        eta += partial * partial;
    }
    r.stat = lrv > 0.0 ? eta / (nd * nd * lrv) : 0.0;
    r.reject_stationarity = r.stat > r.crit_5pct;
    return r;
}

std::string_view to_string(Stationarity s) {
    switch (s) {
        case Stationarity::NonStationary: return "non_stationary";
        case Stationarity::StrictStationary: return "strict_stationary";
        case Stationarity::TrendStationary: return "trend_stationary";
        case Stationarity::DifferenceStationary: return "difference_stationary";
    }
    return "unknown";
}

Stationarity classify_stationarity(bool adf_rejects, bool kpss_rejects) {
    if (adf_rejects && !kpss_rejects) return Stationarity::StrictStationary;
    if (!adf_rejects && kpss_rejects) return Stationarity::NonStationary;
    if (!adf_rejects && !kpss_rejects) return Stationarity::TrendStationary;
    return Stationarity::DifferenceStationary;
}

StationarityResult stationarity(const Eigen::Ref<const Eigen::VectorXd>& values) {
    StationarityResult r;
    r.adf = adf_test(values);
    r.kpss = kpss_test(values);
    r.classification = classify_stationarity(r.adf, r.kpss);
    return r;
}

Decomposition seasonal_decompose(const Eigen::Ref<const Eigen::VectorXd>& values,
                                 std::size_t period) {
    if (period < 2) throw DomainError("decomposition period must be >= 2");
    const Eigen::Index n = values.size();
    const auto p = static_cast<Eigen::Index>(period);
    if (n < 2 * p) {
        throw InsufficientDataError("decomposition needs at least 2 periods of data");
    }
    if (values.hasNaN()) throw DomainError("decomposition input contains absent values");

    Decomposition d;
    d.period = period;
    d.trend = Eigen::VectorXd::Constant(n, kAbsent);
    const Eigen::Index half = p / 2;
    for (Eigen::Index t = half; t + half < n; ++t) {
        double sum;
        if (p % 2 == 1) {
            sum = values.segment(t - half, p).sum();
        } else {
            sum = 0.5 * values[t - half] + values.segment(t - half + 1, p - 1).sum() +
                  0.5 * values[t + half];
        }
        d.trend[t] = sum / static_cast<double>(p);
    }

    Eigen::VectorXd phase_sum = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd phase_count = Eigen::VectorXd::Zero(p);
    for (Eigen::Index t = 0; t < n; ++t) {
        if (is_absent(d.trend[t])) continue;
        phase_sum[t % p] += values[t] - d.trend[t];
        phase_count[t % p] += 1.0;
    }
    Eigen::VectorXd phase_mean = phase_sum.cwiseQuotient(phase_count);
    phase_mean.array() -= phase_mean.mean();

    d.seasonal.resize(n);
    d.residual = Eigen::VectorXd::Constant(n, kAbsent);
    for (Eigen::Index t = 0; t < n; ++t) {
        d.seasonal[t] = phase_mean[t % p];
        if (!is_absent(d.trend[t])) d.residual[t] = values[t] - d.trend[t] - d.seasonal[t];
    }
    return d;
}

ResidualStats residual_stats(const Decomposition& d) {
    std::vector<double> r;
    for (Eigen::Index i = 0; i < d.residual.size(); ++i) {
        if (!is_absent(d.residual[i])) r.push_back(d.residual[i]);
    }
    if (r.size() < 2) throw InsufficientDataError("residual statistics need >= 2 entries");
    const Eigen::Map<const Eigen::VectorXd> v(r.data(), static_cast<Eigen::Index>(r.size()));
    ResidualStats s;
    s.count = r.size();
    s.mean = v.mean();
    s.std = std::sqrt((v.array() - s.mean).square().sum() / static_cast<double>(r.size() - 1));
    return s;
}

std::string_view to_string(TrendPolarity p) {
    return p == TrendPolarity::Positive ? "positive" : "negative";
}

}  // namespace cropcast
