#include "lorentz_compare/grw_spacetime.hpp"

#include "lorentz_compare/errors.hpp"
#include "lorentz_compare/numerics/ode.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace lorentz_compare::grw {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

// Orthonormal basis of R^m whose first column is the unit vector w.
Matrix frame_basis(const Vector& w) {
    const auto m = w.size();
    Matrix Q = Eigen::HouseholderQR<Matrix>(Matrix(w)).householderQ() * Matrix::Identity(m, m);
    if (Q.col(0).dot(w) < 0.0) Q.col(0) = -Q.col(0);
    Q.col(0) = w;
    return Q;
}

Vector unit_axis(int m) {
    Vector e = Vector::Zero(m);
    e[0] = 1.0;
    return e;
}

// State layout: [t, t', sigma, sigma', vec(J), vec(J')].
struct GeodesicSystem {
    const Spacetime& st;
    Point p;
    Vector w;
    int m;
    bool jacobi;

    void rhs(double, const numerics::State& y, numerics::State& dy) const {
        const WarpValues fv = st.warp(y[0]);
        const double t1 = y[1], s1 = y[3];
        dy.resize(y.size());
        dy[0] = t1;
        dy[1] = -fv.f * fv.df * s1 * s1;
        dy[2] = s1;
        dy[3] = -2.0 * (fv.df / fv.f) * t1 * s1;
        if (!jacobi) return;
        const JacobiOperator R = jacobi_operator(st, y[0], t1, s1);
        const int mm = m * m;
        Eigen::Map<const Matrix> J(y.data() + 4, m, m);
        Eigen::Map<const Matrix> Jp(y.data() + 4 + mm, m, m);
        Eigen::Map<Matrix> dJ(dy.data() + 4, m, m);
        Eigen::Map<Matrix> dJp(dy.data() + 4 + mm, m, m);
        dJ = Jp;
        dJp.row(0) = -R.in_plane * J.row(0);
        if (m > 1) dJp.bottomRows(m - 1) = -R.transverse * J.bottomRows(m - 1);
    }

    bool inside(const numerics::State& y) const { return y.allFinite() && st.contains(y[0]); }

    GeodesicSample sample(double s, const numerics::State& y) const {
        GeodesicSample out;
        out.s = s;
        const auto moved = st.fiber().exp(p.x, w, y[2]);
        out.point = Point{y[0], moved.x};
        out.tangent = make_tangent(st, out.point, y[1], y[3] * moved.w);
        if (jacobi) {
            const int mm = m * m;
            out.J = Eigen::Map<const Matrix>(y.data() + 4, m, m);
            out.Jp = Eigen::Map<const Matrix>(y.data() + 4 + mm, m, m);
        }
        return out;
    }
};

numerics::State initial_state(const GeodesicSystem& sys, const Tangent& v, const GeodesicOptions& o) {
    const int m = sys.m;
    numerics::State y(sys.jacobi ? 4 + 2 * m * m : 4);
    y[0] = sys.p.t;
    y[1] = v.dt;
    y[2] = 0.0;
    y[3] = v.dx.norm();
    if (sys.jacobi) {
        const Matrix J0 = o.jacobi.J0.size() ? o.jacobi.J0 : Matrix::Identity(m, m);
        const Matrix Jp0 = o.jacobi.Jp0.size() ? o.jacobi.Jp0 : Matrix::Zero(m, m);
        if (J0.rows() != m || J0.cols() != m || Jp0.rows() != m || Jp0.cols() != m)
            throw DomainError("Jacobi initial data has the wrong shape");
        Eigen::Map<Matrix>(y.data() + 4, m, m) = J0;
        Eigen::Map<Matrix>(y.data() + 4 + m * m, m, m) = Jp0;
    }
    return y;
}

numerics::OdeOptions ode_options(const GeodesicOptions& o) {
    numerics::OdeOptions ode;
    ode.rtol = o.rtol;
    ode.atol = o.atol;
    ode.max_step = o.max_step;
    return ode;
}

struct Run {
    GeodesicTrace trace;
    numerics::State last;
    double t_stop = 0.0;  // parameter at which the integrator was halted
};

// Shared driver: integrates, records samples, refines a domain exit by bisection.
// `stop` may end the run early; the last state inside the interval is returned as well.
Run run_geodesic(const Spacetime& st, const Point& p, const Tangent& v, double span,
                 const GeodesicOptions& options,
                 const std::function<bool(double, const numerics::State&)>& stop) {
    if (!st.contains(p.t)) {
        std::ostringstream msg;
        msg << "geodesic start t = " << p.t << " lies outside (" << st.t_min() << ", " << st.t_max() << ")";
        throw DomainError(msg.str());
    }
    if (p.x.size() != st.fiber_dim() || v.dx.size() != st.fiber_dim())
        throw DomainError("point or tangent has the wrong fiber dimension");
    if (v.dt == 0.0 && v.dx.norm() == 0.0) throw DomainError("geodesic needs a non-zero initial velocity");
    if (options.with_jacobi && v.causal_type != CausalType::timelike)
        throw DomainError("Jacobi propagator requested along a non-timelike geodesic");
    if (!(span > 0.0)) throw DomainError("geodesic parameter span must be positive");

    const int m = st.fiber_dim();
    const double rho = v.dx.norm();
    GeodesicSystem sys{st, p, rho > 0.0 ? Vector(v.dx / rho) : unit_axis(m), m, options.with_jacobi};

    Run run;
    GeodesicTrace& tr = run.trace;
    tr.direction = sys.w;
    tr.frame = frame_basis(sys.w);
    tr.energy = inner(st, p, v, v);
    tr.angular_momentum = st.f(p.t) * st.f(p.t) * rho;

    const numerics::Rhs rhs = [&sys](double s, const numerics::State& y, numerics::State& dy) { sys.rhs(s, y, dy); };
    const numerics::OdeOptions ode = ode_options(options);
    const numerics::State y0 = initial_state(sys, v, options);
    tr.samples.push_back(sys.sample(0.0, y0));

    double s_prev = 0.0;
    numerics::State y_prev = y0;
    bool exited = false, stopped = false;
    const numerics::Observer watch = [&](double s, const numerics::State& y) {
        if (!sys.inside(y)) {
            exited = true;
            return false;
        }
        if (stop && stop(s, y)) {
            stopped = true;
            return false;
        }
        GeodesicSample smp = sys.sample(s, y);
        if (options.observer && !options.observer(smp)) {
            tr.samples.push_back(std::move(smp));
            s_prev = s;
            y_prev = y;
            stopped = true;
            return false;
        }
        tr.samples.push_back(std::move(smp));
        s_prev = s;
        y_prev = y;
        return true;
    };
    // Segment ends land exactly on the requested output parameters.
    std::vector<double> ends;
    for (const double s : options.output_params)
        if (s > 0.0 && s < span) ends.push_back(s);
    std::sort(ends.begin(), ends.end());
    ends.push_back(span);
    numerics::OdeOutcome out;
    double s0 = 0.0;
    numerics::State y = y0;
    for (const double s1 : ends) {
        if (!(s1 > s0)) continue;
        out = numerics::integrate(rhs, s0, y, s1, ode, watch);
        if (exited || stopped || !out.ok()) break;
        s0 = out.t;
        y = out.y;
    }

    if (exited) {
        const auto br = numerics::bisect_crossing(
            rhs, s_prev, y_prev, out.t, [&sys](double, const numerics::State& y) { return !sys.inside(y); },
            1e-13 * std::max(1.0, std::abs(out.t)), ode);
        if (br.t_inside > s_prev) tr.samples.push_back(sys.sample(br.t_inside, br.y_inside));
        s_prev = br.t_inside;
        y_prev = br.y_inside;
        tr.truncated = true;
    } else if (!out.ok()) {
        const double f_here = std::abs(st.f(y_prev[0]));
        if (f_here > 1e-3 * std::abs(st.f(p.t))) {
            std::vector<double> last(y_prev.data(), y_prev.data() + y_prev.size());
            std::ostringstream msg;
            msg << "geodesic integration failed at parameter " << s_prev << " (t = " << y_prev[0] << ")";
            throw IntegrationError(msg.str(), s_prev, std::move(last));
        }
        // Breakdown next to a zero of f: the geodesic runs into the end of the interval.
        tr.truncated = true;
    } else if (!stopped) {
        s_prev = out.t;
        y_prev = out.y;
    }
    tr.param_end = s_prev;
    run.t_stop = out.t;
    tr.length = std::sqrt(std::abs(tr.energy)) * tr.param_end;
    run.last = y_prev;
    return run;
}

}  // namespace

Warp warp_from_profile(const model::WarpingProfile& profile) {
    return Warp{[profile](double t) { return profile.eval(t); }, std::string(model::regime_tag(profile.regime()))};
}

Spacetime::Spacetime(int n, int fiber_curvature, Warp warp, double t_min, double t_max)
    : n_(n), fiber_(fiber_curvature, n - 1), warp_(std::move(warp)), t_min_(t_min), t_max_(t_max) {
    if (n < 2) throw DomainError("spacetime dimension must be >= 2");
    if (!(t_min < t_max)) throw DomainError("empty time interval");
    if (!warp_.eval) throw DomainError("warping function missing");
}

Spacetime Spacetime::from_profile(const model::WarpingProfile& profile) {
    return Spacetime(profile.params().n, profile.fiber_curvature(), warp_from_profile(profile),
                     profile.lower_end(), profile.upper_end());
}

double inner(const Spacetime& st, const Point& p, const Tangent& a, const Tangent& b) {
    const double f = st.f(p.t);
    return -a.dt * b.dt + f * f * a.dx.dot(b.dx);
}

Tangent make_tangent(const Spacetime& st, const Point& p, double dt, const Vector& dx) {
    Tangent v{dt, dx, CausalType::spacelike};
    const double g = inner(st, p, v, v);
    if (std::abs(g) < null_band)
        v.causal_type = CausalType::null;
    else if (g < 0.0)
        v.causal_type = CausalType::timelike;
    return v;
}

JacobiOperator jacobi_operator(const Spacetime& st, double t, double dt, double dsigma) {
    const WarpValues fv = st.warp(t);
    const double E = -dt * dt + fv.f * fv.f * dsigma * dsigma;
    const double q = fv.ddf / fv.f;
    const int k = st.fiber().curvature();
    return {q * E, (k + fv.df * fv.df) * dsigma * dsigma - q * dt * dt};
}

double ricci_timelike(const Spacetime& st, const Point& p, const Tangent& v) {
    if (inner(st, p, v, v) > -null_band) throw DomainError("ricci_timelike requires a timelike vector");
    const JacobiOperator R = jacobi_operator(st, p.t, v.dt, v.dx.norm());
    return R.in_plane + (st.fiber_dim() - 1) * R.transverse;
}

Hypersurface Hypersurface::slice(double t0) {
    Hypersurface h;
    h.slice_ = true;
    h.t0_ = t0;
    std::ostringstream s;
    s << "slice(" << t0 << ")";
    h.label_ = s.str();
    return h;
}

Hypersurface Hypersurface::graph(Height u, std::string label) {
    if (!u) throw DomainError("graph hypersurface needs a height function");
    Hypersurface h;
    h.slice_ = false;
    h.u_ = std::move(u);
    h.label_ = std::move(label);
    return h;
}

GeodesicTrace geodesic(const Spacetime& st, const Point& p, const Tangent& v, double param_span,
                       const GeodesicOptions& options) {
    return run_geodesic(st, p, v, param_span, options, {}).trace;
}

namespace {

struct FiberDerivatives {
    Vector grad;
    Matrix hess;
};

FiberDerivatives fiber_derivatives(const fiber::SpaceForm& F, const Hypersurface::Height& u, const Vector& x,
                                   double h) {
    const int m = F.dim();
    const double u0 = u(x);
    auto along = [&](const Vector& dir, double s) {
        const double len = dir.norm();
        return u(F.exp(x, dir / len, s * len).x);
    };
    FiberDerivatives d{Vector(m), Matrix(m, m)};
    for (int i = 0; i < m; ++i) {
        const Vector e = Vector::Unit(m, i);
        const double up = along(e, h), um = along(e, -h);
        d.grad[i] = (up - um) / (2.0 * h);
        d.hess(i, i) = (up - 2.0 * u0 + um) / (h * h);
    }
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            const Vector a = (Vector::Unit(m, i) + Vector::Unit(m, j)) / std::sqrt(2.0);
            const Vector b = (Vector::Unit(m, i) - Vector::Unit(m, j)) / std::sqrt(2.0);
            const double haa = (along(a, h) - 2.0 * u0 + along(a, -h)) / (h * h);
            const double hbb = (along(b, h) - 2.0 * u0 + along(b, -h)) / (h * h);
            d.hess(i, j) = d.hess(j, i) = 0.5 * (haa - hbb);
        }
    return d;
}

}  // namespace

ShapeResult shape_operator(const Spacetime& st, const Hypersurface& sigma, const Vector& x,
                           const ShapeOptions& options) {
    const int m = st.fiber_dim();
    if (x.size() != m) throw DomainError("fiber point has the wrong dimension");
    ShapeResult r;
    const double t0 = sigma.height(x);
    r.foot = Point{t0, x};
    if (!st.contains(t0)) throw DomainError("hypersurface point lies outside the time interval");
    const WarpValues fv = st.warp(t0);
    if (sigma.is_slice()) {
        r.S = (fv.df / fv.f) * Matrix::Identity(m, m);
        r.H = m * fv.df / fv.f;
        r.normal = make_tangent(st, r.foot, 1.0, Vector::Zero(m));
        r.gradient = Vector::Zero(m);
        return r;
    }

    const double h = options.h_fd * (1.0 + x.norm());
    const auto& u = [&sigma](const Vector& y) { return sigma.height(y); };
    const FiberDerivatives d1 = fiber_derivatives(st.fiber(), u, x, h);
    const FiberDerivatives d2 = fiber_derivatives(st.fiber(), u, x, 0.5 * h);
    const Vector du = (4.0 * d2.grad - d1.grad) / 3.0;
    const Matrix hess = (4.0 * d2.hess - d1.hess) / 3.0;
    r.richardson_mismatch = std::max((du - d2.grad).cwiseAbs().maxCoeff(), (hess - d2.hess).cwiseAbs().maxCoeff());
    r.gradient = du;

    const double f = fv.f, fp = fv.df;
    const double N2 = 1.0 - du.squaredNorm() / (f * f);
    if (!(N2 > 0.0)) {
        std::ostringstream msg;
        msg << "graph is not spacelike at the sampled point (|du|^2 / f^2 = " << 1.0 - N2 << ")";
        throw DomainError(msg.str());
    }
    const double N = std::sqrt(N2);
    const Matrix II = (f * fp * Matrix::Identity(m, m) - 2.0 * (fp / f) * du * du.transpose() + hess) / N;

    const double g = du.norm();
    const Vector w = g > 0.0 ? Vector(du / g) : unit_axis(m);
    const Matrix Q = frame_basis(w);
    Matrix C = Q / f;
    C.col(0) *= 1.0 / N;  // in-plane unit vector of T Sigma: fiber part (n_t / f) w
    r.S = C.transpose() * II * C;
    r.S = 0.5 * (r.S + r.S.transpose());
    r.H = r.S.trace();
    r.normal = make_tangent(st, r.foot, 1.0 / N, du / (N * f * f));
    return r;
}

GeodesicTrace normal_geodesic(const Spacetime& st, const Hypersurface& sigma, const Vector& x, double param_span,
                              GeodesicOptions options) {
    const ShapeResult sh = shape_operator(st, sigma, x);
    const int m = st.fiber_dim();
    if (options.with_jacobi && options.jacobi.J0.size() == 0) {
        options.jacobi.J0 = Matrix::Identity(m, m);
        options.jacobi.Jp0 = sh.S;
    }
    return geodesic(st, sh.foot, sh.normal, param_span, options);
}

FocalResult jacobi_focal_time(const Spacetime& st, const Hypersurface& sigma, const Vector& x,
                              const FocalOptions& options) {
    const ShapeResult sh = shape_operator(st, sigma, x);
    const int m = st.fiber_dim();
    GeodesicOptions go;
    go.with_jacobi = true;
    go.jacobi = {Matrix::Identity(m, m), sh.S};
    const double span = std::isfinite(st.t_max()) ? st.t_max() - sh.foot.t + 1.0 : options.horizon;

    const auto det_of = [m](const numerics::State& y) {
        return Eigen::Map<const Matrix>(y.data() + 4, m, m).determinant();
    };
    const auto focal = [&](double, const numerics::State& y) { return !(det_of(y) > 0.0); };
    Run run = run_geodesic(st, sh.foot, sh.normal, span, go, focal);

    FocalResult r;
    r.end_time = run.trace.param_end;
    r.truncated = run.trace.truncated;
    if (!run.trace.truncated && run.trace.param_end < span) {
        // Stopped by the determinant test: refine between the last positive sample and the stop.
        const double rho = sh.normal.dx.norm();
        GeodesicSystem sys{st, sh.foot, rho > 0.0 ? Vector(sh.normal.dx / rho) : unit_axis(m), m, true};
        const numerics::Rhs rhs = [&sys](double s, const numerics::State& y, numerics::State& dy) { sys.rhs(s, y, dy); };
        numerics::OdeOptions ode = ode_options(go);
        const auto br = numerics::bisect_crossing(
            rhs, run.trace.param_end, run.last, run.t_stop,
            [&](double, const numerics::State& y) { return !sys.inside(y) || !(det_of(y) > 0.0); },
            options.time_tol, ode);
        r.focal_time = br.t_outside;
        r.found = true;
        return r;
    }
    if (run.trace.truncated) {
        const double det = run.trace.back().J.determinant();
        if (std::pow(std::abs(det), 1.0 / m) < options.degenerate) {
            r.focal_time = run.trace.param_end;
            r.found = true;
        }
    }
    return r;
}

CccReport ccc_check(const Spacetime& st, const Hypersurface& sigma, double kappa, double beta,
                    const CccOptions& options) {
    CccReport rep;
    const int m = st.fiber_dim();
    const int n = st.n();
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double lo = std::max(st.t_min(), -options.horizon);
    const double hi = std::min(st.t_max(), options.horizon);
    const double inset = 1e-6 * (hi - lo);

    auto random_direction = [&]() {
        Vector d(m);
        for (int i = 0; i < m; ++i) d[i] = gauss(rng);
        return Vector(d / d.norm());
    };
    auto random_fiber_point = [&]() {
        return Vector(random_direction() * options.fiber_radius * std::pow(unit(rng), 1.0 / m));
    };

    std::size_t bad = 0;
    bool ricci_ok = true;
    for (std::size_t i = 0; i < options.sample_budget; ++i) {
        const Point p{lo + inset + (hi - lo - 2.0 * inset) * unit(rng), random_fiber_point()};
        const double eta = options.max_rapidity * unit(rng);
        const Tangent v = make_tangent(st, p, std::cosh(eta), std::sinh(eta) / std::abs(st.f(p.t)) * random_direction());
        if (v.causal_type != CausalType::timelike) continue;
        // Relative to the size of the curvature terms: k + f'^2 cancels in models as f -> 0.
        const WarpValues fv = st.warp(p.t);
        const double ds2 = v.dx.squaredNorm();
        const double size = (m - 1) * (std::abs(st.fiber().curvature()) + fv.df * fv.df) * ds2 +
                            std::abs(fv.ddf / fv.f) * (n - 1) * (v.dt * v.dt + fv.f * fv.f * ds2) +
                            (n - 1) * std::abs(kappa);
        const double margin = ricci_timelike(st, p, v) - (n - 1) * kappa;
        if (margin < -options.tol * std::max(1.0, size)) ricci_ok = false;
        if (!std::isfinite(margin)) {
            ++bad;
            continue;
        }
        if (margin < rep.ricci_margin) {
            rep.ricci_margin = margin;
            rep.worst_ricci_point = p;
        }
        ++rep.samples;

        const Vector x = random_fiber_point();
        try {
            const double H = shape_operator(st, sigma, x).H;
            if (beta - H < rep.mean_curvature_margin) {
                rep.mean_curvature_margin = beta - H;
                rep.worst_sigma_point = x;
            }
        } catch (const DomainError&) {
            ++bad;
        }
    }
    rep.inconclusive = rep.samples == 0 || bad > options.sample_budget / 2;
    rep.holds = !rep.inconclusive && ricci_ok && rep.mean_curvature_margin >= -options.tol;
    return rep;
}

Spacetime time_reverse(const Spacetime& st) {
    const Warp w = st.warp_function();
    Warp rev{[w](double t) {
                 const WarpValues v = w.eval(-t);
                 return WarpValues{v.f, -v.df, v.ddf};
             },
             "reverse(" + w.label + ")"};
    return Spacetime(st.n(), st.fiber().curvature(), std::move(rev), -st.t_max(), -st.t_min());
}

}  // namespace lorentz_compare::grw
