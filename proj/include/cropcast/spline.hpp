#ifndef CROPCAST_SPLINE_HPP
#define CROPCAST_SPLINE_HPP

#include <algorithm>
#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "cropcast/error.hpp"

namespace cropcast {

/// Natural cubic spline (zero second derivative at both end knots) through
/// strictly increasing knots.
template <typename Scalar>
class NaturalCubicSpline {
public:
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    template <typename DerivedX, typename DerivedY>
    NaturalCubicSpline(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y)
        : x_(x), y_(y) {
        const Eigen::Index n = x_.size();
        if (n < 2 || y_.size() != n) throw ShapeError("spline needs >= 2 knots of matching length");
        second_ = Vector::Zero(n);
        if (n == 2) return;
        // Tridiagonal system for interior second derivatives (Thomas algorithm).
        const Eigen::Index m = n - 2;
        Vector diag(m), upper(m), rhs(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            const Scalar h0 = x_[i + 1] - x_[i];
            const Scalar h1 = x_[i + 2] - x_[i + 1];
            diag[i] = Scalar(2) * (h0 + h1);
            upper[i] = h1;
            rhs[i] = Scalar(6) * ((y_[i + 2] - y_[i + 1]) / h1 - (y_[i + 1] - y_[i]) / h0);
        }
        for (Eigen::Index i = 1; i < m; ++i) {
            const Scalar lower = x_[i + 1] - x_[i];
            const Scalar w = lower / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        second_[m] = rhs[m - 1] / diag[m - 1];
        for (Eigen::Index i = m - 2; i >= 0; --i) {
            second_[i + 1] = (rhs[i] - upper[i] * second_[i + 2]) / diag[i];
        }
    }

    /// Evaluates inside [x_0, x_{n-1}]; outside, the end polynomials extend.
    Scalar operator()(Scalar t) const {
        const Eigen::Index n = x_.size();
        auto it = std::upper_bound(x_.data(), x_.data() + n, t);
        Eigen::Index k = std::clamp<Eigen::Index>(it - x_.data() - 1, 0, n - 2);
        const Scalar h = x_[k + 1] - x_[k];
        const Scalar a = (x_[k + 1] - t) / h;
        const Scalar b = (t - x_[k]) / h;
        return a * y_[k] + b * y_[k + 1] +
               ((a * a * a - a) * second_[k] + (b * b * b - b) * second_[k + 1]) * h * h /
                   Scalar(6);
    }

    const Vector& second_derivatives() const { return second_; }

private:
    Vector x_, y_, second_;
};

}  // namespace cropcast

#endif  // CROPCAST_SPLINE_HPP
