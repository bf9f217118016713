#include "lorentz_compare/lorentz_distance.hpp"

#include "lorentz_compare/errors.hpp"
#include "lorentz_compare/model_catalog.hpp"
#include "lorentz_compare/numerics/ode.hpp"
#include "lorentz_compare/numerics/optimize.hpp"
#include "lorentz_compare/numerics/quadrature.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace lorentz_compare::distance {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

numerics::QuadratureOptions quad_options() {
    numerics::QuadratureOptions q;
    q.rel_tol = 1e-13;
    q.abs_tol = 1e-16;
    q.max_intervals = 20000;
    return q;
}

double integrate(const std::function<double(double)>& g, double a, double b) {
    return numerics::integrate_adaptive(g, a, b, quad_options()).value;
}

// Fiber distance covered by the unit-speed geodesic with angular momentum L over [a, b].
double shoot_distance(const Spacetime& st, double L, double a, double b) {
    return integrate([&](double t) {
        const double f = std::abs(st.f(t));
        const double r = L / f;
        return (r / f) / std::sqrt(1.0 + r * r);
    }, a, b);
}

double shoot_length(const Spacetime& st, double L, double a, double b) {
    return integrate([&](double t) {
        const double r = L / std::abs(st.f(t));
        return 1.0 / std::sqrt(1.0 + r * r);
    }, a, b);
}

// (b - a) - length, as the integral of 1 - 1/sqrt(1 + r^2).
double shoot_deficit(const Spacetime& st, double L, double a, double b) {
    if (L == 0.0) return 0.0;
    return integrate([&](double t) {
        const double r = L / std::abs(st.f(t));
        const double s = std::sqrt(1.0 + r * r);
        return r * r / (s * (s + 1.0));
    }, a, b);
}

struct Candidate {
    double d;
    bool reversed;  // travel against the log direction (around the sphere)
};

std::vector<Candidate> fiber_candidates(const Spacetime& st, double d0, int windings) {
    std::vector<Candidate> c{{d0, false}};
    if (st.fiber().curvature() > 0) {
        const double two_pi = 2.0 * std::numbers::pi;
        for (int k = 0; k <= windings; ++k) {
            if (k > 0) c.push_back({d0 + two_pi * k, false});
            if (d0 > 0.0) c.push_back({two_pi * (k + 1) - d0, true});
        }
    }
    return c;
}

bool same_point(const Point& a, const Point& b) { return a.t == b.t && (a.x - b.x).norm() == 0.0; }

}  // namespace

double null_fiber_limit(const Spacetime& st, double t0, double t1) {
    if (t1 <= t0) return 0.0;
    return integrate([&](double t) { return 1.0 / std::abs(st.f(t)); }, t0, t1);
}

DistanceResult tau_point(const Spacetime& st, const Point& p, const Point& q, const TauOptions& options) {
    if (!st.contains(p.t) || !st.contains(q.t)) throw DomainError("tau_point: points must lie inside the time interval");
    DistanceResult res;
    res.foot = p;
    if (q.t <= p.t) {
        res.causal = same_point(p, q);
        res.deficit = res.causal ? 0.0 : std::numeric_limits<double>::quiet_NaN();
        res.diagnostics.note = res.causal ? "q = p" : "no causal connection";
        return res;
    }

    const double a = p.t, b = q.t;
    const auto dir = st.fiber().log(p.x, q.x);
    const double N = null_fiber_limit(st, a, b);
    const auto candidates = fiber_candidates(st, dir.distance, options.max_windings);

    double best_len = -1.0, best_L = 0.0, best_def = 0.0;
    bool best_rev = false;
    for (const auto& c : candidates) {
        ++res.diagnostics.multistart_count;
        if (c.d >= N) {
            if (c.d <= N * (1.0 + 1e-14)) res.causal = true;  // null related
            continue;
        }
        double L = 0.0;
        if (c.d > 0.0) {
            const auto g = [&](double l) { return shoot_distance(st, l, a, b) - c.d; };
            double lo = 0.0, hi = std::abs(st.f(a)) * c.d / (b - a) + 1e-300;
            double g_hi = g(hi);
            int doublings = 0;
            while (g_hi <= 0.0 && doublings < 2000) {
                lo = hi;
                hi *= 2.0;
                g_hi = g(hi);
                ++doublings;
            }
            if (!(g_hi > 0.0)) {
                res.diagnostics.converged = false;
                res.diagnostics.note = "angular momentum bracket failed";
                continue;
            }
            std::uintmax_t iters = 200;
            const auto root = boost::math::tools::toms748_solve(g, lo, hi, g(lo), g_hi,
                                                                boost::math::tools::eps_tolerance<double>(50), iters);
            L = 0.5 * (root.first + root.second);
            res.diagnostics.bracket_width = std::max(res.diagnostics.bracket_width, root.second - root.first);
            if (iters >= 200) res.diagnostics.converged = false;
        }
        const double len = shoot_length(st, L, a, b);
        if (len > best_len) {
            best_len = len;
            best_L = L;
            best_def = shoot_deficit(st, L, a, b);
            best_rev = c.reversed;
        }
    }
    if (best_len < 0.0) {
        res.deficit = std::numeric_limits<double>::quiet_NaN();
        if (res.diagnostics.note.empty()) res.diagnostics.note = res.causal ? "null related" : "no causal connection";
        return res;
    }

    res.causal = true;
    res.value = best_len;
    res.deficit = best_def;
    res.angular_momentum = best_L;
    const double f0 = st.f(a);
    const Vector w = dir.distance > 0.0 ? Vector(best_rev ? -dir.w : dir.w) : Vector::Zero(st.fiber_dim());
    const double r0 = best_L / std::abs(f0);
    res.initial_velocity = grw::make_tangent(st, p, std::sqrt(1.0 + r0 * r0), (best_L / (f0 * f0)) * w);
    if (options.want_maximizer) {
        grw::GeodesicOptions go;
        go.max_step = options.maximizer_max_step;
        if (options.with_jacobi) {
            const int m = st.fiber_dim();
            go.with_jacobi = true;
            go.jacobi = {grw::Matrix::Zero(m, m), grw::Matrix::Identity(m, m)};
        }
        res.maximizer = grw::geodesic(st, p, res.initial_velocity, res.value, go);
    }
    return res;
}

DistanceResult tau_sigma(const Spacetime& st, const Hypersurface& sigma, const Point& q, const SigmaOptions& options) {
    if (!st.contains(q.t)) throw DomainError("tau_sigma: q must lie inside the time interval");
    const int m = st.fiber_dim();
    TauOptions to;
    to.want_maximizer = options.want_maximizer;

    if (sigma.is_slice() && !options.force_search) {
        const Point foot{sigma.slice_time(), q.x};
        if (q.t < foot.t) {
            DistanceResult r;
            r.foot = foot;
            r.diagnostics.note = "q lies in the past of Sigma";
            return r;
        }
        DistanceResult r = tau_point(st, foot, q, to);
        r.diagnostics.note = "slice: vertical maximizer";
        return r;
    }

    const double u_here = sigma.height(q.x);
    double radius = options.search_radius;
    if (!(radius > 0.0)) {
        // Graphs may dip below the foot under q; allow one time unit of depth.
        double t_low = std::min(u_here, q.t) - (sigma.is_slice() ? 0.0 : 1.0);
        if (std::isfinite(st.t_min())) t_low = std::max(t_low, st.t_min() + 1e-3 * (q.t - st.t_min()));
        try {
            radius = 1.5 * null_fiber_limit(st, t_low, q.t) + 1e-3;
        } catch (const QuadratureError&) {
            radius = inf;
        }
        radius = std::min(radius, std::min(st.fiber().injectivity_radius(), 50.0));
    }

    auto foot_at = [&](const Vector& x) { return Point{sigma.height(x), x}; };
    auto objective = [&](const Vector& x) {
        const Point f = foot_at(x);
        if (!st.contains(f.t) || f.t >= q.t) return 0.0;
        return tau_point(st, f, q).value;
    };

    // Deterministic multistart layout around q's fiber point.
    std::vector<Vector> starts;
    const std::size_t K = std::max<std::size_t>(options.multistart, 2);
    if (m == 1) {
        starts.push_back(q.x);
        for (std::size_t i = 0; i < K; ++i) {
            const double s = -radius + 2.0 * radius * static_cast<double>(i) / static_cast<double>(K - 1);
            starts.push_back(st.fiber().exp(q.x, Vector::Ones(1), s).x);
        }
    } else {
        std::mt19937_64 rng(0x5eed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        starts.push_back(q.x);
        for (std::size_t i = 1; i < K; ++i) {
            Vector d(m);
            if (m == 2) {
                const double ang = static_cast<double>(i) * std::numbers::pi * (3.0 - std::sqrt(5.0));
                d << std::cos(ang), std::sin(ang);
            } else {
                for (int j = 0; j < m; ++j) d[j] = gauss(rng);
                d.normalize();
            }
            const double r = radius * std::sqrt((static_cast<double>(i) + 0.5) / static_cast<double>(K));
            starts.push_back(st.fiber().exp(q.x, d, r).x);
        }
    }
    std::vector<std::pair<double, Vector>> scored;
    for (const auto& x : starts) scored.emplace_back(objective(x), x);
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

    DistanceResult best;
    best.foot = foot_at(q.x);
    best.diagnostics.multistart_count = starts.size();
    if (!(scored.front().first > 0.0)) {
        best.diagnostics.note = "no foot point in the causal past of q";
        return best;
    }
    const double scale = 2.0 * radius / static_cast<double>(K);
    double best_val = -1.0;
    Vector best_x;
    bool all_converged = true;
    // Refine every start that beats its nearest neighbours: separate local maxima (a dip in
    // the graph, say) would be lost by refining only the best few scores.
    std::vector<Vector> seeds;
    const std::size_t nb = std::min<std::size_t>(2 * static_cast<std::size_t>(m), scored.size() - 1);
    for (std::size_t i = 0; i < scored.size() && seeds.size() < 8; ++i) {
        if (!(scored[i].first > 0.0)) break;
        std::vector<std::pair<double, double>> near;  // (distance, score)
        for (std::size_t j = 0; j < scored.size(); ++j)
            if (j != i) near.emplace_back((scored[j].second - scored[i].second).norm(), scored[j].first);
        std::partial_sort(near.begin(), near.begin() + static_cast<std::ptrdiff_t>(nb), near.end());
        bool peak = i < 3;
        if (!peak) {
            peak = true;
            for (std::size_t j = 0; j < nb; ++j) peak = peak && scored[i].first >= near[j].second;
        }
        if (peak) seeds.push_back(scored[i].second);
    }
    for (const auto& seed : seeds) {
        const auto nm = numerics::nelder_mead([&](const Vector& x) { return -objective(x); }, seed, scale,
                                              options.x_tol, 4000);
        all_converged = all_converged && nm.converged;
        if (-nm.value > best_val) {
            best_val = -nm.value;
            best_x = nm.x;
        }
    }
    DistanceResult r = tau_point(st, foot_at(best_x), q, to);
    r.diagnostics.multistart_count = starts.size();
    r.diagnostics.converged = all_converged && r.diagnostics.converged;
    r.diagnostics.bracket_width = scale;
    r.diagnostics.note = "foot-point search";
    return r;
}

TriangleReport reverse_triangle_check(const Spacetime& st, const TriangleOptions& options) {
    TriangleReport rep;
    const int m = st.fiber_dim();
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double lo = std::max(st.t_min(), -options.horizon);
    const double hi = std::min(st.t_max(), options.horizon);

    auto random_step = [&](const Point& from) -> std::optional<Point> {
        Vector d(m);
        for (int j = 0; j < m; ++j) d[j] = gauss(rng);
        d.normalize();
        const double eta = options.max_rapidity * unit(rng);
        const Tangent v = grw::make_tangent(st, from, std::cosh(eta), std::sinh(eta) / std::abs(st.f(from.t)) * d);
        const double span = options.max_span * (0.05 + 0.95 * unit(rng));
        const auto tr = grw::geodesic(st, from, v, span);
        if (tr.truncated) return std::nullopt;
        return tr.back().point;
    };

    std::size_t attempts = 0;
    while (rep.chains < options.sample_budget && attempts < 20 * options.sample_budget) {
        ++attempts;
        Vector x0(m);
        for (int j = 0; j < m; ++j) x0[j] = unit(rng) - 0.5;
        // Keep the chain in the lower part of the interval so it has room to move up.
        const double t0 = lo + (hi - lo) * (0.05 + 0.45 * unit(rng));
        const Point p{t0, x0};
        const auto q = random_step(p);
        if (!q) continue;
        const auto r = random_step(*q);
        if (!r) continue;
        const double pq = tau_point(st, p, *q).value;
        const double qr = tau_point(st, *q, *r).value;
        const double pr = tau_point(st, p, *r).value;
        const double scale = std::max(1.0, pr);
        const double margin = (pr - pq - qr) / scale;
        rep.worst_margin = std::min(rep.worst_margin, margin);
        if (margin < -options.tol) ++rep.violations;
        if (options.sigma) {
            const double sq = tau_sigma(st, *options.sigma, *q).value;
            const double sr = tau_sigma(st, *options.sigma, *r).value;
            const double sm = (sr - sq - qr) / std::max(1.0, sr);
            rep.worst_sigma_margin = std::min(rep.worst_sigma_margin, sm);
            if (sm < -options.tol) ++rep.sigma_violations;
        }
        ++rep.chains;
    }
    rep.holds = rep.chains == options.sample_budget && rep.violations == 0 && rep.sigma_violations == 0;
    return rep;
}

std::string to_string(CutCause c) {
    switch (c) {
        case CutCause::conjugate_point: return "conjugate_point";
        case CutCause::competing_geodesic: return "competing_geodesic";
        case CutCause::horizon: return "horizon";
    }
    return "unknown";
}

CutResult cut_parameter(const Spacetime& st, const Hypersurface& sigma, const Vector& x, const CutOptions& options) {
    CutResult res;
    const auto shape = grw::shape_operator(st, sigma, x);
    res.v = shape.normal;
    grw::FocalOptions fo;
    fo.horizon = options.horizon;
    const auto focal = grw::jacobi_focal_time(st, sigma, x, fo);
    res.focal_time = focal.focal_time;
    res.truncated = focal.truncated;

    double upper = focal.found ? focal.focal_time : (focal.truncated ? focal.end_time : inf);
    const CutCause end_cause = focal.found ? CutCause::conjugate_point : CutCause::horizon;

    if (sigma.is_slice()) {
        // Every vertical segment realises tau_Sigma = t - t0, so only the focal time or the
        // end of the interval can stop maximality.
        res.cut_parameter = upper;
        res.cause = end_cause;
        return res;
    }

    const double scan_end = std::isfinite(upper) ? upper : options.horizon;
    const auto point_at = [&](double s) {
        return grw::normal_geodesic(st, sigma, x, s).back().point;
    };
    const auto maximal = [&](double s) {
        const Point q = point_at(s);
        const double tau = tau_sigma(st, sigma, q, options.search).value;
        return tau - s <= options.tol * std::max(1.0, s);
    };
    double ok = 0.0;
    double bad = inf;
    const std::size_t K = std::max<std::size_t>(options.scan_points, 2);
    for (std::size_t i = 1; i <= K; ++i) {
        // Stay a hair inside the scan end: the geodesic may stop right at it.
        const double s = scan_end * (static_cast<double>(i) / static_cast<double>(K)) * (1.0 - 1e-9);
        if (maximal(s)) {
            ok = s;
        } else {
            bad = s;
            break;
        }
    }
    if (!std::isfinite(bad)) {
        res.cut_parameter = std::isfinite(upper) ? upper : inf;
        res.cause = end_cause;
        return res;
    }
    while (bad - ok > 1e-7 * std::max(1.0, bad)) {
        const double mid = 0.5 * (ok + bad);
        (maximal(mid) ? ok : bad) = mid;
    }
    res.cut_parameter = 0.5 * (ok + bad);
    res.cause = CutCause::competing_geodesic;
    return res;
}

NullReachResult null_reach(const Spacetime& st, double t_start, double r) {
    if (!st.contains(t_start)) throw DomainError("null_reach: t_start outside the time interval");
    if (r < 0.0) throw DomainError("null_reach: radius must be non-negative");
    NullReachResult res{t_start, false};
    if (r == 0.0) return res;
    const numerics::Rhs rhs = [&st](double, const numerics::State& y, numerics::State& dy) {
        dy.resize(1);
        dy[0] = std::abs(st.f(y[0]));
    };
    numerics::OdeOptions ode;
    ode.rtol = 1e-13;
    ode.atol = 1e-15;
    numerics::State y0(1);
    y0[0] = t_start;
    double s_prev = 0.0;
    numerics::State y_prev = y0;
    bool exited = false;
    const auto out = numerics::integrate(rhs, 0.0, y0, r, ode, [&](double s, const numerics::State& y) {
        if (!st.contains(y[0])) {
            exited = true;
            return false;
        }
        s_prev = s;
        y_prev = y;
        return true;
    });
    if (exited || !out.ok()) {
        res.truncated = true;
        res.arrival = y_prev[0];
        return res;
    }
    res.arrival = out.y[0];
    return res;
}

DalembertSample dalembert_at(const Spacetime& st, const Point& p, const Point& q, double kappa) {
    TauOptions to;
    to.want_maximizer = true;
    to.with_jacobi = true;
    const auto r = tau_point(st, p, q, to);
    if (!(r.value > 0.0) || !r.maximizer) throw DomainError("dalembert_at: q is not in the chronological future of p");
    DalembertSample s;
    s.q = q;
    s.tau = r.value;
    const auto& end = r.maximizer->back();
    s.minus_box = end.J.partialPivLu().solve(end.Jp).trace();
    s.bound = r.value < model::s_kappa_horizon(kappa) ? (st.n() - 1) * model::s_kappa(kappa, r.value)
                                                     : std::numeric_limits<double>::quiet_NaN();
    return s;
}

DalembertReport dalembert_check(const Spacetime& st, const Point& p, double kappa, const DalembertOptions& options) {
    DalembertReport rep;
    const int m = st.fiber_dim();
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::size_t attempts = 0;
    while (rep.samples.size() < options.sample_budget && attempts < 20 * options.sample_budget) {
        ++attempts;
        Vector d(m);
        for (int j = 0; j < m; ++j) d[j] = gauss(rng);
        d.normalize();
        const double eta = options.max_rapidity * unit(rng);
        const Tangent v = grw::make_tangent(st, p, std::cosh(eta), std::sinh(eta) / std::abs(st.f(p.t)) * d);
        const double span = options.max_tau * (0.05 + 0.95 * unit(rng));
        const auto tr = grw::geodesic(st, p, v, span);
        if (tr.truncated) {
            ++rep.excluded;
            continue;
        }
        const Point q = tr.back().point;
        // Past the cut locus some other geodesic is longer; also drop points close to it.
        const double tau = tau_point(st, p, q).value;
        if (tau - span > options.cut_margin * std::max(1.0, span)) {
            ++rep.excluded;
            continue;
        }
        DalembertSample s = dalembert_at(st, p, q, kappa);
        if (!std::isfinite(s.bound) || !std::isfinite(s.minus_box)) {
            ++rep.excluded;
            continue;
        }
        rep.worst_margin = std::min(rep.worst_margin, (s.bound - s.minus_box) / std::max(1.0, std::abs(s.bound)));
        rep.samples.push_back(s);
    }
    rep.holds = !rep.samples.empty() && rep.worst_margin >= -options.tol;
    return rep;
}

nlohmann::json to_json(const DistanceResult& r) {
    nlohmann::json foot = nlohmann::json::array({r.foot.t});
    for (Eigen::Index i = 0; i < r.foot.x.size(); ++i) foot.push_back(r.foot.x[i]);
    return {{"value", r.value},
            {"converged", r.diagnostics.converged},
            {"causal", r.causal},
            {"foot_point", foot},
            {"diagnostics",
             {{"multistart_count", r.diagnostics.multistart_count},
              {"bracket_width", r.diagnostics.bracket_width},
              {"note", r.diagnostics.note}}}};
}

}  // namespace lorentz_compare::distance
