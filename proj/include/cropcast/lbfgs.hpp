#ifndef CROPCAST_LBFGS_HPP
#define CROPCAST_LBFGS_HPP

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace cropcast {

/// f(x) with its gradient written into the second argument.
using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct LbfgsOptions {
    std::size_t max_iter = 200;
    std::size_t history = 10;
    double gradient_tolerance = 1e-5;  // on the infinity norm
    double relative_tolerance = 1e-12; // on the per-step loss decrease
    double c1 = 1e-4;                  // sufficient decrease
    double c2 = 0.9;                   // curvature (strong Wolfe)
    std::size_t max_line_search = 25;
};

struct LbfgsResult {
    Eigen::VectorXd x;
    double f = 0.0;
    /// f at the start and after every accepted step; non-increasing.
    std::vector<double> history;
    std::size_t iterations = 0;
    bool converged = false;
    std::string message;
};

/// Limited-memory BFGS with a strong-Wolfe line search (bracketing and cubic
/// zoom). A failed line search stops early with the best point so far.
LbfgsResult minimize_lbfgs(const Objective& objective, Eigen::VectorXd x0,
                           const LbfgsOptions& options = {});

}  // namespace cropcast

#endif  // CROPCAST_LBFGS_HPP
