#include "cropcast/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>

namespace cropcast {

namespace {

struct Trial {
    double step = 0.0;
    double f = 0.0;
    double slope = 0.0;  // directional derivative along the search direction
    Eigen::VectorXd x;
    Eigen::VectorXd g;
};

class LineSearch {
public:
    LineSearch(const Objective& objective, const LbfgsOptions& options, const Eigen::VectorXd& x0,
               double f0, const Eigen::VectorXd& g0, const Eigen::VectorXd& direction)
        : objective_(objective), opt_(options), x0_(x0), dir_(direction) {
        origin_.step = 0.0;
        origin_.f = f0;
        origin_.slope = g0.dot(direction);
        origin_.x = x0;
        origin_.g = g0;
    }

    /// Returns a point satisfying the strong Wolfe conditions, or the best
    /// sufficient-decrease point seen when the search runs out of budget.
    std::optional<Trial> run(double initial_step) {
        Trial prev = origin_;
        double step = initial_step;
        for (std::size_t i = 0; i < opt_.max_line_search; ++i) {
            Trial cur = evaluate(step);
            if (!std::isfinite(cur.f) || armijo_fails(cur) || (i > 0 && cur.f >= prev.f)) {
                return zoom(prev, cur);
            }
            if (std::abs(cur.slope) <= -opt_.c2 * origin_.slope) return cur;
            if (cur.slope >= 0.0) return zoom(cur, prev);
            prev = std::move(cur);
            step *= 2.0;
        }
        return fallback();
    }

private:
    Trial evaluate(double step) {
        Trial t;
        t.step = step;
        t.x = x0_ + step * dir_;
        t.g.resize(x0_.size());
        t.f = objective_(t.x, t.g);
        t.slope = t.g.dot(dir_);
        ++evaluations_;
        if (std::isfinite(t.f) && !armijo_fails(t) && (!best_ || t.f < best_->f)) best_ = t;
        return t;
    }

    bool armijo_fails(const Trial& t) const {
        return t.f > origin_.f + opt_.c1 * t.step * origin_.slope;
    }

    static double cubic_minimizer(const Trial& a, const Trial& b) {
        const double d1 = a.slope + b.slope - 3.0 * (a.f - b.f) / (a.step - b.step);
        const double disc = d1 * d1 - a.slope * b.slope;
        if (!(disc >= 0.0)) return std::numeric_limits<double>::quiet_NaN();
        const double d2 = std::copysign(std::sqrt(disc), b.step - a.step);
        const double denom = b.slope - a.slope + 2.0 * d2;
        if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
        return b.step - (b.step - a.step) * (b.slope + d2 - d1) / denom;
    }

    std::optional<Trial> zoom(Trial lo, Trial hi) {
        for (std::size_t i = 0; i < opt_.max_line_search; ++i) {
            const double left = std::min(lo.step, hi.step);
            const double right = std::max(lo.step, hi.step);
            const double width = right - left;
            if (width <= 1e-16 * std::max(1.0, right)) break;
            double step = std::isfinite(hi.f) ? cubic_minimizer(lo, hi)
                                              : std::numeric_limits<double>::quiet_NaN();
            if (!std::isfinite(step) || step < left + 0.1 * width || step > right - 0.1 * width) {
                step = 0.5 * (left + right);
            }
            Trial cur = evaluate(step);
            if (!std::isfinite(cur.f) || armijo_fails(cur) || cur.f >= lo.f) {
                hi = std::move(cur);
            } else {
                if (std::abs(cur.slope) <= -opt_.c2 * origin_.slope) return cur;
                if (cur.slope * (hi.step - lo.step) >= 0.0) hi = lo;
                lo = std::move(cur);
            }
        }
        return fallback();
    }

    std::optional<Trial> fallback() const {
        if (best_ && best_->f < origin_.f) return best_;
        return std::nullopt;
    }

    const Objective& objective_;
    const LbfgsOptions& opt_;
    const Eigen::VectorXd& x0_;
    const Eigen::VectorXd& dir_;
    Trial origin_;
    std::optional<Trial> best_;
    std::size_t evaluations_ = 0;
};

}  // namespace

LbfgsResult minimize_lbfgs(const Objective& objective, Eigen::VectorXd x0,
                           const LbfgsOptions& options) {
    LbfgsResult r;
    r.x = std::move(x0);
    Eigen::VectorXd g(r.x.size());
    r.f = objective(r.x, g);
    r.history.push_back(r.f);
    if (!std::isfinite(r.f)) {
        r.message = "objective is not finite at the starting point";
        return r;
    }

    std::deque<Eigen::VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;
    std::vector<double> alpha;

    for (std::size_t iter = 0; iter < options.max_iter; ++iter) {
        if (g.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance) {
            r.converged = true;
            r.message = "gradient below tolerance";
            break;
        }
        // Two-loop recursion for -H g.
        Eigen::VectorXd q = g;
        const std::size_t m = s_hist.size();
        alpha.assign(m, 0.0);
        for (std::size_t i = m; i-- > 0;) {
            alpha[i] = rho_hist[i] * s_hist[i].dot(q);
            q -= alpha[i] * y_hist[i];
        }
        if (m > 0) q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
        for (std::size_t i = 0; i < m; ++i) {
            const double beta = rho_hist[i] * y_hist[i].dot(q);
            q += (alpha[i] - beta) * s_hist[i];
        }
        Eigen::VectorXd dir = -q;
        if (!(g.dot(dir) < 0.0)) {
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            dir = -g;
        }
        const double initial = m == 0 ? std::min(1.0, 1.0 / g.norm()) : 1.0;

        LineSearch search(objective, options, r.x, r.f, g, dir);
        std::optional<Trial> next = search.run(initial);
        if (!next) {
            r.message = "line search failed";
            break;
        }
        Eigen::VectorXd s = next->x - r.x;
        Eigen::VectorXd y = next->g - g;
        const double sy = s.dot(y);
        const double decrease = r.f - next->f;
        r.x = std::move(next->x);
        g = std::move(next->g);
        const double previous = r.f;
        r.f = next->f;
        r.history.push_back(r.f);
        r.iterations = iter + 1;
        if (sy > 1e-12 * y.squaredNorm()) {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / sy);
            if (s_hist.size() > options.history) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
        if (decrease <= options.relative_tolerance * std::max({std::abs(previous), std::abs(r.f), 1.0})) {
            r.converged = true;
            r.message = "relative decrease below tolerance";
            break;
        }
    }
    if (r.message.empty()) {
        r.converged = g.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance;
        r.message = r.converged ? "gradient below tolerance" : "iteration limit reached";
    }
    return r;
}

}  // namespace cropcast
