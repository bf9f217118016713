#include "lorentz_compare/numerics/ode.hpp"

#include <algorithm>
#include <cmath>

namespace lorentz_compare::numerics {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

double error_norm(const State& err, const State& y0, const State& y1, const OdeOptions& o) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
        const double sc = o.atol + o.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double r = err[i] / sc;
        acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(std::max<Eigen::Index>(1, err.size())));
}

double initial_step(const Rhs& rhs, double t0, const State& y0, const State& f0, double dir,
                    const OdeOptions& o) {
    if (o.initial_step > 0.0) return o.initial_step;
    double d0 = 0.0, d1 = 0.0;
    for (Eigen::Index i = 0; i < y0.size(); ++i) {
        const double sc = o.atol + o.rtol * std::abs(y0[i]);
        d0 += (y0[i] / sc) * (y0[i] / sc);
        d1 += (f0[i] / sc) * (f0[i] / sc);
    }
    const double n = static_cast<double>(std::max<Eigen::Index>(1, y0.size()));
    d0 = std::sqrt(d0 / n);
    d1 = std::sqrt(d1 / n);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    State y1 = y0 + dir * h0 * f0;
    State f1(y0.size());
    rhs(t0 + dir * h0, y1, f1);
    double d2 = 0.0;
    for (Eigen::Index i = 0; i < y0.size(); ++i) {
        const double sc = o.atol + o.rtol * std::abs(y0[i]);
        d2 += ((f1[i] - f0[i]) / sc) * ((f1[i] - f0[i]) / sc);
    }
    d2 = std::sqrt(d2 / n) / h0;
    const double dmax = std::max(d1, d2);
    double h1 = (dmax <= 1e-15 || !std::isfinite(dmax)) ? std::max(1e-6, h0 * 1e-3)
                                                         : std::pow(0.01 / dmax, 0.2);
    return std::min({100.0 * h0, h1, o.max_step});
}

}  // namespace

OdeOutcome integrate(const Rhs& rhs, double t0, const State& y0, double t1,
                     const OdeOptions& options, const Observer& observer) {
    OdeOutcome out;
    out.t = t0;
    out.y = y0;
    if (t1 == t0) return out;

    const double dir = t1 > t0 ? 1.0 : -1.0;
    const Eigen::Index n = y0.size();
    State k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), err(n);

    double t = t0;
    State y = y0;
    rhs(t, y, k1);
    if (!k1.allFinite()) {
        out.status = OdeStatus::non_finite;
        return out;
    }
    double h = std::min(initial_step(rhs, t, y, k1, dir, options), std::abs(t1 - t0));

    for (std::size_t step = 0;; ++step) {
        if (step >= options.max_steps) {
            out.status = OdeStatus::max_steps;
            break;
        }
        const double hmin = options.min_step * std::max(1.0, std::abs(t));
        if (h < hmin) {
            out.status = OdeStatus::step_underflow;
            break;
        }
        bool last = false;
        if (h >= std::abs(t1 - t)) {
            h = std::abs(t1 - t);
            last = true;
        }
        const double hs = dir * h;

        ytmp = y + hs * a21 * k1;
        rhs(t + c2 * hs, ytmp, k2);
        ytmp = y + hs * (a31 * k1 + a32 * k2);
        rhs(t + c3 * hs, ytmp, k3);
        ytmp = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs(t + c4 * hs, ytmp, k4);
        ytmp = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs(t + c5 * hs, ytmp, k5);
        ytmp = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        rhs(t + hs, ytmp, k6);
        ynew = y + hs * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        const double tnew = last ? t1 : t + hs;
        rhs(tnew, ynew, k7);
        err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        const double en = (ynew.allFinite() && k7.allFinite()) ? error_norm(err, y, ynew, options)
                                                                : std::numeric_limits<double>::infinity();
        if (!std::isfinite(en) || en > 1.0) {
            const double fac = std::isfinite(en) ? std::max(0.2, 0.9 * std::pow(en, -0.2)) : 0.25;
            h *= fac;
            continue;
        }

        t = tnew;
        y = ynew;
        k1 = k7;
        out.steps += 1;
        out.last_step = h;
        out.t = t;
        out.y = y;
        if (observer && !observer(t, y)) {
            out.status = OdeStatus::stopped_by_observer;
            return out;
        }
        if (last) {
            out.status = OdeStatus::reached_end;
            return out;
        }
        const double fac = en == 0.0 ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(en, -0.2)));
        h = std::min(h * fac, options.max_step);
    }
    out.t = t;
    out.y = y;
    return out;
}

Bracket bisect_crossing(const Rhs& rhs, double t_lo, const State& y_lo, double t_hi,
                        const std::function<bool(double, const State&)>& crossed,
                        double time_tol, const OdeOptions& options) {
    Bracket br{t_lo, y_lo, t_hi};
    while (std::abs(br.t_outside - br.t_inside) > time_tol) {
        const double mid = 0.5 * (br.t_inside + br.t_outside);
        if (mid == br.t_inside || mid == br.t_outside) break;
        const OdeOutcome o = integrate(rhs, br.t_inside, br.y_inside, mid, options);
        if (o.status != OdeStatus::reached_end || crossed(mid, o.y)) {
            br.t_outside = mid;
        } else {
            br.t_inside = mid;
            br.y_inside = o.y;
        }
    }
    return br;
}

}  // namespace lorentz_compare::numerics
