#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>

namespace lorentz_compare::numerics {

struct SimplexResult {
    Eigen::VectorXd x;
    double value = 0.0;
    std::size_t evaluations = 0;
    bool converged = false;
};

/// Nelder-Mead minimization started from `x0` with initial edge length `scale`.
/// Converges when the simplex diameter drops below `x_tol`.
SimplexResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                          const Eigen::VectorXd& x0, double scale, double x_tol = 1e-10,
                          std::size_t max_evaluations = 4000);

/// Golden-section maximization of a unimodal function on [lo, hi].
double golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                          double x_tol = 1e-10);

}  // namespace lorentz_compare::numerics
