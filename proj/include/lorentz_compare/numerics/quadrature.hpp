#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace lorentz_compare::numerics {

struct QuadratureOptions {
    double abs_tol = 1e-13;
    double rel_tol = 1e-12;
    std::size_t max_intervals = 4000;
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    std::size_t intervals = 0;
};

/// Globally adaptive Gauss-Kronrod (7,15) quadrature of f over [a, b] (either order).
/// Throws QuadratureError naming the worst subinterval if the budget is exhausted.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    const QuadratureOptions& options = {});

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1], nodes by Newton iteration on P_n.
GaussRule gauss_legendre(std::size_t n);

}  // namespace lorentz_compare::numerics
