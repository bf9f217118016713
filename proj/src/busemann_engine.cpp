#include "lorentz_compare/busemann_engine.hpp"

#include "lorentz_compare/errors.hpp"
#include "lorentz_compare/model_catalog.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

namespace lorentz_compare::busemann {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

Vector velocity_vector(const Tangent& v) {
    Vector out(v.dx.size() + 1);
    out[0] = v.dt;
    out.tail(v.dx.size()) = v.dx;
    return out;
}

// s_kappa continued to the ends of its domain: s_kappa(inf) = sqrt|kappa| (or 0).
double s_kappa_extended(double kappa, double s) {
    if (std::isinf(s)) return kappa < 0.0 ? std::sqrt(-kappa) : 0.0;
    if (s >= model::s_kappa_horizon(kappa)) return std::numeric_limits<double>::quiet_NaN();
    return model::s_kappa(kappa, s);
}

// Weight w with T_K + w (T_K - T_{K-1}) the extrapolated limit: truncation errors are
// linear in (a - r) for finite a and in 1/r for infinite a.
double extrapolation_weight(double a, double r_prev, double r_last) {
    if (std::isfinite(a)) return (a - r_last) / (r_last - r_prev);
    return r_prev / (r_last - r_prev);
}

// Distance to the limit in the variable the truncation errors are polynomial in.
double limit_gap(double a, double r) { return std::isfinite(a) ? a - r : 1.0 / r; }

// Quadratic Lagrange extrapolation to gap 0 from the last three samples.
Vector extrapolate3(double a, const double* r, const Vector* v) {
    const double e0 = limit_gap(a, r[0]), e1 = limit_gap(a, r[1]), e2 = limit_gap(a, r[2]);
    return v[0] * (e1 * e2 / ((e0 - e1) * (e0 - e2))) + v[1] * (e0 * e2 / ((e1 - e0) * (e1 - e2))) +
           v[2] * (e0 * e1 / ((e2 - e0) * (e2 - e1)));
}

}  // namespace

Point SigmaRay::at(double r) const {
    if (r == 0.0) return start;
    if (sigma.is_slice()) return Point{start.t + r, foot};
    return grw::normal_geodesic(spacetime, sigma, foot, r).back().point;
}

SigmaRay make_ray(const Spacetime& st, const Hypersurface& sigma, const Vector& foot, double horizon) {
    const auto sh = grw::shape_operator(st, sigma, foot);
    double a = inf;
    if (sigma.is_slice()) {
        a = st.t_max() - sh.foot.t;
    } else {
        const auto tr = grw::normal_geodesic(st, sigma, foot, horizon);
        if (tr.truncated) a = tr.param_end;
    }
    return SigmaRay{st, sigma, foot, sh.foot, sh.normal, a};
}

std::vector<double> default_schedule(const SigmaRay& ray, const ScheduleOptions& options) {
    std::vector<double> r;
    if (std::isfinite(ray.a)) {
        const double r0 = options.r0 > 0.0 ? options.r0 : 0.5 * ray.a;
        const double last = ray.a - options.finite_cap;
        if (!(r0 < last)) throw DomainError("schedule start lies beyond the capped ray length");
        for (int k = 0;; ++k) {
            const double rk = ray.a - (ray.a - r0) * std::ldexp(1.0, -k);
            if (rk >= last) break;
            r.push_back(rk);
        }
        r.push_back(last);
    } else {
        const double r0 = options.r0 > 0.0 ? options.r0 : 1.0;
        for (double rk = r0; rk <= options.infinite_cap; rk *= 2.0) r.push_back(rk);
    }
    return r;
}

BusemannValue busemann(const Point& x, const SigmaRay& ray, const std::vector<double>& schedule,
                       const BusemannOptions& options) {
    BusemannValue out;
    const Spacetime& st = ray.spacetime;
    for (const double r : schedule) {
        const Point g = ray.at(r);
        const auto tau = distance::tau_point(st, x, g);
        if (!(tau.value > 0.0)) {
            ++out.skipped;
            continue;
        }
        // r - tau = r - (t_g - t_x) + deficit; for slice rays r - (t_g - t_x) = t_x - t_start exactly.
        const double head = ray.sigma.is_slice() ? x.t - ray.start.t : r - (g.t - x.t);
        const double value = head + tau.deficit;
        if (!out.truncations.empty() && value > out.truncations.back().value + options.monotone_tol)
            out.monotone = false;
        out.truncations.push_back({r, value});
        const auto k = out.truncations.size();
        if (k >= 3 && std::abs(out.truncations[k - 1].value - out.truncations[k - 2].value) < options.stop_tol) break;
    }
    if (out.truncations.empty()) throw DomainError("busemann: x is not in the past of the scheduled ray points");
    const auto k = out.truncations.size();
    out.value = out.truncations.back().value;
    out.tail_bound = k >= 2 ? std::abs(out.truncations[k - 2].value - out.value) : inf;
    out.extrapolated = out.value;
    if (k >= 2) {
        const auto& prev = out.truncations[k - 2];
        out.extrapolated = out.value + extrapolation_weight(ray.a, prev.r, out.truncations.back().r) * (out.value - prev.value);
    }
    return out;
}

AsymptoteResult asymptote(const Point& p, const SigmaRay& ray, const std::vector<double>& schedule,
                          const AsymptoteOptions& options) {
    AsymptoteResult res;
    const Spacetime& st = ray.spacetime;
    std::vector<double> rs;
    for (const double r : schedule) {
        const auto tau = distance::tau_point(st, p, ray.at(r));
        if (tau.value > 0.0) {
            res.velocities.push_back(tau.initial_velocity);
            rs.push_back(r);
        }
    }
    const auto K = res.velocities.size();
    const std::size_t need = options.richardson ? 5 : 3;
    if (K < need) throw DomainError("asymptote: too few maximizers along the schedule");
    // Cauchy test over the last three (extrapolated) velocities. Near a focal end the
    // velocities carry a visible (a - r)^2 term, so the extrapolation is quadratic.
    std::vector<Vector> seq;
    for (std::size_t i = K - 3; i < K; ++i) {
        if (options.richardson) {
            const Vector v[3] = {velocity_vector(res.velocities[i - 2]), velocity_vector(res.velocities[i - 1]),
                                 velocity_vector(res.velocities[i])};
            seq.push_back(extrapolate3(ray.a, &rs[i - 2], v));
        } else {
            seq.push_back(velocity_vector(res.velocities[i]));
        }
    }
    res.cauchy_gap = std::max((seq[2] - seq[1]).norm(), (seq[1] - seq[0]).norm());
    res.converged = res.cauchy_gap < options.cauchy_tol;

    const Vector dx = seq[2].tail(seq[2].size() - 1);
    const double f = st.f(p.t);
    res.limit = grw::make_tangent(st, p, std::sqrt(1.0 + f * f * dx.squaredNorm()), dx);

    double span = 0.0;
    for (double t : options.check_times) span = std::max(span, t);
    res.trace = grw::geodesic(st, p, res.limit, span > 0.0 ? span : 1.0);
    res.b_p = busemann(p, ray, schedule).extrapolated;
    bool ok = res.converged;
    for (const double t : options.check_times) {
        const auto tr = grw::geodesic(st, p, res.limit, t);
        if (tr.truncated) continue;  // past the end of the asymptote's interval
        const double err = busemann(tr.back().point, ray, schedule).extrapolated - t - res.b_p;
        res.check_times.push_back(t);
        res.check_errors.push_back(err);
        if (!(std::abs(err) < options.property_tol)) ok = false;
    }
    res.property_holds = ok && !res.check_times.empty();
    return res;
}

Point level_point(const SigmaRay& ray, const Vector& x, double level, const std::vector<double>& schedule,
                  double t_tol) {
    const Spacetime& st = ray.spacetime;
    const auto b_at = [&](double t) { return busemann(Point{t, x}, ray, schedule).extrapolated - level; };
    // b >= tau_Sigma, so b is at least `level` one unit of time above Sigma.
    double hi = ray.sigma.height(x) + level;
    if (!st.contains(hi)) throw DomainError("level_point: level lies outside the time interval");
    double g_hi = b_at(hi);
    if (std::abs(g_hi) <= 1e-14) return Point{hi, x};
    double step = std::max(1e-3, 0.5 * std::abs(level));
    double lo = hi - step;
    double g_lo = st.contains(lo) ? b_at(lo) : 0.0;
    for (int i = 0; i < 60 && !(g_lo < 0.0 && g_hi > 0.0); ++i) {
        if (g_hi <= 0.0) {
            lo = hi;
            g_lo = g_hi;
            hi = hi + step;
            if (!st.contains(hi)) throw DomainError("level_point: bracket left the time interval");
            g_hi = b_at(hi);
        } else {
            step *= 2.0;
            lo = hi - step;
            if (!st.contains(lo)) throw DomainError("level_point: bracket left the time interval");
            g_lo = b_at(lo);
        }
    }
    if (!(g_lo < 0.0 && g_hi > 0.0)) throw DomainError("level_point: could not bracket the level");
    std::uintmax_t iters = 100;
    const auto root = boost::math::tools::toms748_solve(
        b_at, lo, hi, g_lo, g_hi, [t_tol](double a, double b) { return std::abs(b - a) < t_tol; }, iters);
    return Point{0.5 * (root.first + root.second), x};
}

SupportReport support_bound_check(const SigmaRay& ray, double t_level, double kappa,
                                  const std::vector<double>& schedule, const SupportOptions& options) {
    SupportReport rep;
    const Spacetime& st = ray.spacetime;
    const Spacetime rev = grw::time_reverse(st);
    const int m = st.fiber_dim();
    const double remaining = ray.a - t_level;
    if (!(remaining > 0.0)) throw DomainError("support_bound_check: level beyond the ray length");

    std::vector<double> s_grid;
    if (std::isfinite(remaining)) {
        for (std::size_t j = 1; j <= options.s_points; ++j)
            s_grid.push_back(remaining * static_cast<double>(j) / static_cast<double>(options.s_points + 1));
        for (int k = 2; k <= 7; ++k) s_grid.push_back(remaining * (1.0 - std::pow(10.0, -k)));
    } else {
        for (double s = 0.25; s <= options.infinite_s_cap; s *= 4.0) s_grid.push_back(s);
    }
    const double level_bound = -(st.n() - 1) * s_kappa_extended(kappa, remaining);

    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t i = 0; i < options.sample_budget; ++i) {
        Vector x = ray.foot;
        if (i > 0) {
            Vector d(m);
            for (int j = 0; j < m; ++j) d[j] = gauss(rng);
            d.normalize();
            x = st.fiber().exp(ray.foot, d, options.fiber_radius * unit(rng)).x;
        }
        SupportSample smp;
        try {
            smp.p = level_point(ray, x, t_level, schedule);
            smp.b_p = busemann(smp.p, ray, schedule).extrapolated;
            const auto asym = asymptote(smp.p, ray, schedule, AsymptoteOptions{1e-5, 2e-4, {}, true});
            for (const double s : s_grid) {
                const auto tr = grw::geodesic(st, smp.p, asym.limit, s);
                if (tr.truncated) continue;
                const Point z = tr.back().point;
                // Past sphere of z through p: future sphere of the mirrored point in the reversed spacetime.
                const auto ds = distance::dalembert_at(rev, Point{-z.t, z.x}, Point{-smp.p.t, smp.p.x}, kappa);
                const double H = -ds.minus_box;
                const double bound = -(st.n() - 1) * model::s_kappa(kappa, s);
                smp.s.push_back(s);
                smp.H.push_back(H);
                smp.bound.push_back(bound);
                rep.worst_margin = std::min(rep.worst_margin, (H - bound) / std::max(1.0, std::abs(bound)));
            }
        } catch (const DomainError&) {
            ++rep.excluded;
            continue;
        } catch (const IntegrationError&) {
            ++rep.excluded;
            continue;
        }
        if (smp.H.empty()) {
            ++rep.excluded;
            continue;
        }
        // For an infinite ray the level bound is the s -> inf limit; H(s) approaches it like 1/s.
        double H_end = smp.H.back();
        if (!std::isfinite(remaining) && smp.H.size() >= 2) {
            const auto k = smp.H.size();
            H_end += extrapolation_weight(remaining, smp.s[k - 2], smp.s[k - 1]) * (smp.H[k - 1] - smp.H[k - 2]);
        }
        smp.level_margin = (H_end - level_bound) / std::max(1.0, std::abs(level_bound));
        rep.worst_level_margin = std::min(rep.worst_level_margin, smp.level_margin);
        rep.samples.push_back(std::move(smp));
    }
    rep.holds = !rep.samples.empty() && rep.worst_margin >= -options.tol && rep.worst_level_margin >= -options.tol;
    return rep;
}

CoRayReport co_ray_check(const SigmaRay& ray, double kappa, double beta, const CoRayOptions& options) {
    CoRayReport rep;
    const Spacetime& st = ray.spacetime;
    const int n = st.n();
    if (!(kappa > 0.0 || beta <= -(n - 1) * std::sqrt(std::abs(kappa)) + 1e-12)) {
        rep.skipped = true;
        rep.reason = "precondition: need kappa > 0 or beta <= -(n-1) sqrt|kappa|";
        return rep;
    }
    const auto ccc = grw::ccc_check(st, ray.sigma, kappa, beta);
    if (!ccc.holds) {
        rep.skipped = true;
        rep.reason = "precondition: CCC(kappa, beta) fails on samples";
        return rep;
    }
    const double b = model::build_profile({kappa, beta, n}).upper_end();
    const bool maximal = std::isinf(b) ? std::isinf(ray.a) : std::abs(ray.a - b) < 1e-6 * std::max(1.0, b);
    if (!maximal) {
        rep.skipped = true;
        rep.reason = "precondition: ray length differs from b";
        return rep;
    }

    const int m = st.fiber_dim();
    const double t_end = std::isfinite(ray.a) ? ray.a - options.end_margin : 10.0;
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    distance::SigmaOptions so;
    so.force_search = true;
    for (std::size_t i = 0; i < options.sample_budget; ++i) {
        Vector d(m);
        for (int j = 0; j < m; ++j) d[j] = gauss(rng);
        d.normalize();
        const Vector x = st.fiber().exp(ray.foot, d, options.neighborhood_radius * unit(rng)).x;
        for (std::size_t j = 1; j <= options.t_points; ++j) {
            const double t = t_end * static_cast<double>(j) / static_cast<double>(options.t_points);
            const auto tr = grw::normal_geodesic(st, ray.sigma, x, t);
            if (tr.truncated) {
                rep.worst_gap = inf;
                continue;
            }
            const double gap = std::abs(distance::tau_sigma(st, ray.sigma, tr.back().point, so).value - t);
            rep.worst_gap = std::max(rep.worst_gap, gap);
            ++rep.checked;
        }
    }
    rep.holds = rep.checked > 0 && rep.worst_gap < options.tol;
    return rep;
}

void write_truncations_csv(std::ostream& os, const BusemannValue& b) {
    os << "r,truncation\n";
    os.precision(15);
    for (const auto& t : b.truncations) os << t.r << ',' << t.value << '\n';
}

void write_level_set_csv(std::ostream& os, const std::vector<Point>& pts) {
    os << "t";
    if (!pts.empty())
        for (Eigen::Index i = 0; i < pts.front().x.size(); ++i) os << ",x" << i + 1;
    os << '\n';
    os.precision(15);
    for (const auto& p : pts) {
        os << p.t;
        for (Eigen::Index i = 0; i < p.x.size(); ++i) os << ',' << p.x[i];
        os << '\n';
    }
}

}  // namespace lorentz_compare::busemann
