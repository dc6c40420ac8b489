#include <cmath>
#include <limits>

#include <Eigen/QR>

#include "cropcast/error.hpp"
#include "cropcast/models.hpp"
#include "cropcast/stats.hpp"

namespace cropcast {

namespace {

bool is_constant(const Eigen::VectorXd& v) { return v.size() == 0 || v.maxCoeff() == v.minCoeff(); }

ArBaseline mean_model(const Eigen::VectorXd& w, int d) {
    ArBaseline m;
    m.differencing = d;
    m.order = 1;
    m.coefficients = Eigen::VectorXd::Zero(2);
    m.coefficients[0] = w.size() > 0 ? w.mean() : 0.0;
    return m;
}

struct Fit {
    Eigen::VectorXd beta;
    double rss = 0.0;
    Eigen::Index rows = 0;
    bool ok = false;
};

// Regresses w[t] on 1, w[t-1] .. w[t-p] for t in [first, n).
Fit ols(const Eigen::VectorXd& w, std::size_t p, Eigen::Index first) {
    const Eigen::Index n = w.size();
    const Eigen::Index rows = n - first;
    const auto pp = static_cast<Eigen::Index>(p);
    Fit fit;
    if (rows <= pp + 1) return fit;
    Eigen::MatrixXd x(rows, pp + 1);
    x.col(0).setOnes();
    for (Eigen::Index j = 1; j <= pp; ++j) x.col(j) = w.segment(first - j, rows);
    const Eigen::VectorXd y = w.tail(rows);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < pp + 1) return fit;
    fit.beta = qr.solve(y);
    fit.rss = (y - x * fit.beta).squaredNorm();
    fit.rows = rows;
    fit.ok = fit.beta.allFinite();
    return fit;
}

}  // namespace

ArBaseline ar_fit(const Eigen::Ref<const Eigen::VectorXd>& values, std::size_t max_order) {
    if (static_cast<std::size_t>(values.size()) < kArMinLength) {
        throw InsufficientDataError("AR baseline needs at least " + std::to_string(kArMinLength) + " values");
    }
    if (!values.allFinite()) throw DomainError("AR baseline input contains non-finite values");
    if (max_order < 1) throw DomainError("AR max order must be >= 1");

    const Eigen::VectorXd raw = values;
    if (is_constant(raw)) return mean_model(raw, 0);

    int d = 0;
    try {
        d = adf_test(raw).reject_unit_root ? 0 : 1;
    } catch (const NumericalError&) {
        d = 1;
    }
    const Eigen::VectorXd w =
        d == 0 ? raw : Eigen::VectorXd(raw.tail(raw.size() - 1) - raw.head(raw.size() - 1));
    if (is_constant(w)) return mean_model(w, d);

    const auto first = static_cast<Eigen::Index>(max_order);
    std::size_t best_p = 0;
    double best_aic = std::numeric_limits<double>::infinity();
    for (std::size_t p = 1; p <= max_order; ++p) {
        const Fit f = ols(w, p, first);
        if (!f.ok || !(f.rss > 0.0)) continue;
        const auto m = static_cast<double>(f.rows);
        const double aic = m * std::log(f.rss / m) + 2.0 * static_cast<double>(p + 1);
        if (aic < best_aic) {
            best_aic = aic;
            best_p = p;
        }
    }
    if (best_p == 0) return mean_model(w, d);

    const Fit f = ols(w, best_p, static_cast<Eigen::Index>(best_p));
    ArBaseline m;
    m.differencing = d;
    m.order = best_p;
    m.coefficients = f.ok ? f.beta : ols(w, best_p, first).beta;
    m.aic = best_aic;
    return m;
}

Eigen::VectorXd ar_predict(const ArBaseline& model, const Eigen::Ref<const Eigen::VectorXd>& recent,
                           std::size_t horizon) {
    const auto p = static_cast<Eigen::Index>(model.order);
    if (model.coefficients.size() != p + 1) throw ShapeError("AR coefficients do not match the order");
    const Eigen::Index need = p + model.differencing;
    if (recent.size() < need) {
        throw InsufficientDataError("AR forecast needs " + std::to_string(need) + " recent values");
    }
    if (!recent.allFinite()) throw DomainError("AR forecast input contains non-finite values");

    Eigen::VectorXd w = recent.tail(need);
    if (model.differencing == 1) w = Eigen::VectorXd(w.tail(p) - w.head(p));
    std::vector<double> hist(w.data(), w.data() + w.size());
    Eigen::VectorXd out(static_cast<Eigen::Index>(horizon));
    double level = recent[recent.size() - 1];
    for (Eigen::Index h = 0; h < out.size(); ++h) {
        double next = model.coefficients[0];
        for (Eigen::Index j = 1; j <= p; ++j) next += model.coefficients[j] * hist[hist.size() - static_cast<std::size_t>(j)];
        hist.push_back(next);
        if (model.differencing == 1) {
            level += next;
            out[h] = level;
        } else {
            out[h] = next;
        }
    }
    return out;
}

}  // namespace cropcast
