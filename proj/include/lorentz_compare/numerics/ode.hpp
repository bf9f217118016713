#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <limits>

namespace lorentz_compare::numerics {

using State = Eigen::VectorXd;

/// dy/dt = rhs(t, y), written into the third argument.
using Rhs = std::function<void(double, const State&, State&)>;

/// Called after every accepted step; returning false stops the integration.
using Observer = std::function<bool(double, const State&)>;

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double initial_step = 0.0;  // 0 selects a step from the local scale
    double max_step = std::numeric_limits<double>::infinity();
    double min_step = 1e-15;    // relative to max(1, |t|)
    std::size_t max_steps = 2'000'000;
};

enum class OdeStatus { reached_end, stopped_by_observer, step_underflow, non_finite, max_steps };

struct OdeOutcome {
    OdeStatus status = OdeStatus::reached_end;
    double t = 0.0;
    State y;
    std::size_t steps = 0;
    double last_step = 0.0;

    bool ok() const noexcept {
        return status == OdeStatus::reached_end || status == OdeStatus::stopped_by_observer;
    }
};

/// Adaptive Dormand-Prince 5(4) integration from t0 to t1 (t1 < t0 runs backward).
/// Non-finite right-hand sides shrink the step; the integration reports
/// step_underflow once the step cannot shrink further.
OdeOutcome integrate(const Rhs& rhs, double t0, const State& y0, double t1,
                     const OdeOptions& options = {}, const Observer& observer = {});

struct Bracket {
    double t_inside;   // last time where the predicate was false
    State y_inside;
    double t_outside;  // first time where the predicate holds (or integration broke down)
};

/// Bisect in time for the first point where `crossed(t, y)` becomes true, starting
/// from a state where it is false and a time `t_hi` known to be past the crossing.
/// A failed sub-integration counts as crossed (poles lie beyond blow-up thresholds).
Bracket bisect_crossing(const Rhs& rhs, double t_lo, const State& y_lo, double t_hi,
                        const std::function<bool(double, const State&)>& crossed,
                        double time_tol, const OdeOptions& options = {});

}  // namespace lorentz_compare::numerics
