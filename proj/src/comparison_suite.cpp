#include "lorentz_compare/comparison_suite.hpp"

#include "lorentz_compare/errors.hpp"
#include "lorentz_compare/numerics/ode.hpp"
#include "lorentz_compare/numerics/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <ostream>

namespace lorentz_compare::comparison {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

double area_factor(const Spacetime& st, const Hypersurface& sigma, const Vector& x) {
    const int m = st.fiber_dim();
    const double u = sigma.height(x);
    const double f = std::abs(st.f(u));
    if (sigma.is_slice()) return std::pow(f, m);
    const auto sh = grw::shape_operator(st, sigma, x);
    const double g2 = sh.gradient.squaredNorm() / (f * f);
    if (!(g2 < 1.0)) throw DomainError("graph is not spacelike over the region");
    return std::pow(f, m) * std::sqrt(1.0 - g2);
}

// Per-node samples on the time grid.
struct NodeRow {
    std::vector<double> det, trace, aniso, vol;
    std::vector<char> alive;
};

struct Panels {
    std::vector<double> params;          // sorted output parameters
    std::vector<double> nodes, weights;  // volume quadrature points (params) and weights
};

Panels build_panels(const std::vector<double>& grid, double end, const numerics::GaussRule& gl, double max_panel) {
    Panels p;
    std::vector<double> breaks{0.0};
    for (const double t : grid)
        if (t > 0.0 && t <= end) breaks.push_back(t);
    if (end > breaks.back()) breaks.push_back(end);
    for (std::size_t i = 1; i < breaks.size(); ++i) {
        const double a = breaks[i - 1], b = breaks[i];
        const auto pieces = static_cast<std::size_t>(std::ceil((b - a) / max_panel));
        for (std::size_t k = 0; k < std::max<std::size_t>(pieces, 1); ++k) {
            const double lo = a + (b - a) * static_cast<double>(k) / static_cast<double>(pieces);
            const double hi = a + (b - a) * static_cast<double>(k + 1) / static_cast<double>(pieces);
            for (std::size_t j = 0; j < gl.nodes.size(); ++j) {
                p.nodes.push_back(0.5 * (lo + hi) + 0.5 * (hi - lo) * gl.nodes[j]);
                p.weights.push_back(0.5 * (hi - lo) * gl.weights[j]);
            }
        }
    }
    p.params = p.nodes;
    p.params.insert(p.params.end(), breaks.begin() + 1, breaks.end());
    std::sort(p.params.begin(), p.params.end());
    p.params.erase(std::unique(p.params.begin(), p.params.end()), p.params.end());
    return p;
}

struct JacobiValues {
    double det, trace, aniso;
};

JacobiValues jacobi_values(const Matrix& J, const Matrix& Jp) {
    const double det = J.determinant();
    const Matrix S = Jp * J.inverse();
    const double tr = S.trace();
    const Matrix A = S - (tr / static_cast<double>(S.rows())) * Matrix::Identity(S.rows(), S.cols());
    return {det, tr, A.norm()};
}

NodeRow sample_node(const Spacetime& st, const Hypersurface& sigma, const Vector& x, const std::vector<double>& grid,
                    const numerics::GaussRule& gl, const AreaOptions& opt) {
    const std::size_t T = grid.size();
    NodeRow row{std::vector<double>(T, 0.0), std::vector<double>(T, 0.0), std::vector<double>(T, 0.0),
                std::vector<double>(T, 0.0), std::vector<char>(T, 0)};
    const double cut = distance::cut_parameter(st, sigma, x, opt.cut).cut_parameter;
    const double end = std::min(grid.back(), cut - opt.cut_band);

    Panels panels;
    const auto shape = grw::shape_operator(st, sigma, x);
    const JacobiValues at_zero = jacobi_values(Matrix::Identity(st.fiber_dim(), st.fiber_dim()), shape.S);

    std::vector<JacobiValues> vals;
    if (end > 0.0) {
        panels = build_panels(grid, end, gl, opt.max_panel);
        grw::GeodesicOptions go;
        go.with_jacobi = true;
        go.output_params = panels.params;
        const auto tr = grw::normal_geodesic(st, sigma, x, end, go);
        std::size_t k = 0;
        for (const double p : panels.params) {
            const double tol = 1e-12 * std::max(1.0, p);
            while (k < tr.samples.size() && tr.samples[k].s < p - tol) ++k;
            if (k == tr.samples.size() || std::abs(tr.samples[k].s - p) > tol) break;
            vals.push_back(jacobi_values(tr.samples[k].J, tr.samples[k].Jp));
        }
    }
    const auto value_at = [&](double p) -> const JacobiValues* {
        const auto it = std::lower_bound(panels.params.begin(), panels.params.end(), p);
        const auto i = static_cast<std::size_t>(it - panels.params.begin());
        if (it == panels.params.end() || *it != p || i >= vals.size()) return nullptr;
        return &vals[i];
    };

    // Cumulative volume along the panels, read off at the grid points.
    double cum = 0.0;
    std::size_t q = 0;
    for (std::size_t i = 0; i < T; ++i) {
        const double t = grid[i];
        while (q < panels.nodes.size() && panels.nodes[q] < std::min(t, end)) {
            const JacobiValues* v = value_at(panels.nodes[q]);
            if (v) cum += panels.weights[q] * v->det;
            ++q;
        }
        row.vol[i] = cum;
        if (t == 0.0) {
            row.det[i] = at_zero.det;
            row.trace[i] = at_zero.trace;
            row.aniso[i] = at_zero.aniso;
            row.alive[i] = 1;
        } else if (t <= end) {
            if (const JacobiValues* v = value_at(t)) {
                row.det[i] = v->det;
                row.trace[i] = v->trace;
                row.aniso[i] = v->aniso;
                row.alive[i] = 1;
            }
        }
    }
    return row;
}

void check_grid(const std::vector<double>& grid) {
    if (grid.empty()) throw DomainError("time grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] >= 0.0) || !std::isfinite(grid[i])) throw DomainError("time grid values must be finite and >= 0");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw DomainError("time grid must be increasing");
    }
}

}  // namespace

RegionSpec RegionSpec::ball(Hypersurface sigma, Vector center, double radius, std::size_t resolution) {
    RegionSpec r;
    r.sigma = std::move(sigma);
    r.shape = Shape::ball;
    r.center = std::move(center);
    r.radius = radius;
    r.resolution = resolution;
    return r;
}

RegionSpec RegionSpec::box(Hypersurface sigma, Vector lower, Vector upper, std::size_t resolution) {
    RegionSpec r;
    r.sigma = std::move(sigma);
    r.shape = Shape::box;
    r.lower = std::move(lower);
    r.upper = std::move(upper);
    r.resolution = resolution;
    return r;
}

std::vector<FiberNode> fiber_nodes(const Spacetime& st, const RegionSpec& region) {
    const auto& F = st.fiber();
    const int m = F.dim();
    const std::size_t N = region.resolution;
    if (N < 1) throw DomainError("region resolution must be positive");
    const auto gl = numerics::gauss_legendre(N);
    std::vector<FiberNode> out;

    if (region.shape == RegionSpec::Shape::ball) {
        if (region.center.size() != m) throw DomainError("ball center has the wrong dimension");
        if (!(region.radius > 0.0)) throw DomainError("ball radius must be positive");
        if (m > 3) throw DomainError("ball regions need fiber dimension <= 3; use a box");
        const double R = std::min(region.radius, F.injectivity_radius() - 1e-6);
        const double two_pi = 2.0 * std::numbers::pi;
        for (std::size_t i = 0; i < N; ++i) {
            const double r = 0.5 * R * (gl.nodes[i] + 1.0);
            const double wr = 0.5 * R * gl.weights[i];
            const double sn = F.sn(r);
            const auto push = [&](const Vector& dir, double w) {
                out.push_back({F.exp(region.center, dir, r).x, w});
            };
            if (m == 1) {
                push(Vector::Constant(1, 1.0), wr);
                push(Vector::Constant(1, -1.0), wr);
            } else if (m == 2) {
                for (std::size_t j = 0; j < N; ++j) {
                    const double a = two_pi * static_cast<double>(j) / static_cast<double>(N);
                    push(Eigen::Vector2d(std::cos(a), std::sin(a)), wr * sn * two_pi / static_cast<double>(N));
                }
            } else {
                const std::size_t Na = 2 * N;
                for (std::size_t k = 0; k < N; ++k) {
                    const double z = gl.nodes[k], s = std::sqrt(1.0 - z * z);
                    for (std::size_t j = 0; j < Na; ++j) {
                        const double a = two_pi * static_cast<double>(j) / static_cast<double>(Na);
                        push(Eigen::Vector3d(s * std::cos(a), s * std::sin(a), z),
                             wr * sn * sn * gl.weights[k] * two_pi / static_cast<double>(Na));
                    }
                }
            }
        }
    } else {
        if (region.lower.size() != m || region.upper.size() != m) throw DomainError("box corners have the wrong dimension");
        for (int d = 0; d < m; ++d)
            if (!(region.upper[d] > region.lower[d])) throw DomainError("box upper corner must exceed the lower one");
        std::vector<std::size_t> idx(static_cast<std::size_t>(m), 0);
        while (true) {
            Vector x(m);
            double w = 1.0;
            for (int d = 0; d < m; ++d) {
                const double h = 0.5 * (region.upper[d] - region.lower[d]);
                x[d] = region.lower[d] + h * (gl.nodes[idx[d]] + 1.0);
                w *= h * gl.weights[idx[d]];
            }
            if (F.curvature() > 0 && x.norm() >= fiber::SpaceForm::sphere_chart_limit)
                throw DomainError("box leaves the spherical chart");
            out.push_back({x, w * F.polar_density(x.norm())});
            int d = 0;
            while (d < m && ++idx[d] == N) idx[d++] = 0;
            if (d == m) break;
        }
    }
    for (auto& node : out) node.weight *= area_factor(st, region.sigma, node.x);
    return out;
}

double region_area(const Spacetime& st, const RegionSpec& region, double* doubling_gap) {
    double a = 0.0;
    for (const auto& node : fiber_nodes(st, region)) a += node.weight;
    if (doubling_gap) {
        RegionSpec fine = region;
        fine.resolution *= 2;
        double b = 0.0;
        for (const auto& node : fiber_nodes(st, fine)) b += node.weight;
        *doubling_gap = std::abs(b - a);
    }
    return a;
}

AreaProfile area_profile(const Spacetime& st, const RegionSpec& region, const std::vector<double>& t_grid,
                         const AreaOptions& options) {
    check_grid(t_grid);
    const auto nodes = fiber_nodes(st, region);
    const auto gl = numerics::gauss_legendre(options.panel_points);
    const std::size_t N = nodes.size(), T = t_grid.size();
    std::vector<NodeRow> rows(N);
    std::vector<std::exception_ptr> errors(N);

#pragma omp parallel for schedule(dynamic) if (options.parallel)
    for (std::size_t i = 0; i < N; ++i) {
        try {
            rows[i] = sample_node(st, region.sigma, nodes[i].x, t_grid, gl, options);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    AreaProfile out;
    out.t = t_grid;
    out.nodes = N;
    out.area.assign(T, 0.0);
    out.volume.assign(T, 0.0);
    out.mean_H.assign(T, 0.0);
    out.max_H.assign(T, -inf);
    out.min_H.assign(T, inf);
    out.anisotropy.assign(T, 0.0);
    out.excluded.assign(T, 0);
    for (std::size_t i = 0; i < N; ++i) {
        const double w = nodes[i].weight;
        out.area_A += w;
        for (std::size_t k = 0; k < T; ++k) {
            out.volume[k] += w * rows[i].vol[k];
            if (!rows[i].alive[k]) {
                ++out.excluded[k];
                continue;
            }
            const double a = w * rows[i].det[k];
            out.area[k] += a;
            out.mean_H[k] += a * rows[i].trace[k];
            out.max_H[k] = std::max(out.max_H[k], rows[i].trace[k]);
            out.min_H[k] = std::min(out.min_H[k], rows[i].trace[k]);
            out.anisotropy[k] = std::max(out.anisotropy[k], rows[i].aniso[k]);
        }
    }
    for (std::size_t k = 0; k < T; ++k) out.mean_H[k] = out.area[k] != 0.0 ? out.mean_H[k] / out.area[k] : 0.0;
    return out;
}

double area_sphere(const Spacetime& st, const RegionSpec& region, double t, const AreaOptions& options) {
    return area_profile(st, region, {t}, options).area.front();
}

double vol_ball(const Spacetime& st, const RegionSpec& region, double t, const AreaOptions& options) {
    return area_profile(st, region, {t}, options).volume.front();
}

std::vector<double> default_t_grid(const model::WarpingProfile& profile, std::size_t count, double horizon) {
    std::vector<double> g;
    const double b = profile.upper_end();
    if (std::isfinite(b)) {
        const double q = std::pow(1e-3, 1.0 / static_cast<double>(count));
        for (std::size_t k = 1; k <= count; ++k) g.push_back(b * (1.0 - std::pow(q, static_cast<double>(k))));
    } else {
        for (std::size_t k = 1; k <= count; ++k)
            g.push_back(horizon * static_cast<double>(k) / static_cast<double>(count));
    }
    return g;
}

ComparisonReport monotonicity_report(const Spacetime& st, const RegionSpec& region,
                                     const model::WarpingProfile& profile, const std::vector<double>& t_grid,
                                     const ReportOptions& options) {
    const int n = st.n();
    const int m = st.fiber_dim();
    if (profile.params().n != n) throw DomainError("model profile dimension differs from the spacetime");
    const auto vp = model::volume_profile(profile);
    const double f0 = profile.f(0.0);
    const auto ap = area_profile(st, region, t_grid, options.area);

    ComparisonReport r;
    r.t = t_grid;
    r.area_A = ap.area_A;
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        const double t = t_grid[k];
        const double h = profile.f_prime(t) / profile.f(t);
        r.area_ratio.push_back(ap.area[k] / std::pow(profile.f(t) / f0, n - 1));
        r.vol_ratio.push_back(t > 0.0 ? ap.volume[k] / vp.v(t) : ap.area_A);
        // Frobenius distance to h Id, bounded through the extreme traces and the traceless part.
        const double dev = std::max(std::abs(ap.max_H[k] / m - h), std::abs(ap.min_H[k] / m - h));
        r.isotropy_defect.push_back(std::sqrt(ap.anisotropy[k] * ap.anisotropy[k] + m * dev * dev) /
                                    std::max(1.0, std::abs(h)));
        r.mean_curvature_excess.push_back(ap.max_H[k] - profile.H(t));
        r.excluded_max = std::max(r.excluded_max, ap.excluded[k]);
    }

    const double b = profile.upper_end();
    const double t_small = 1e-4 * std::min(1.0, b);
    const auto z = area_profile(st, region, {t_small}, options.area);
    r.limit_at_zero = z.area.front() / std::pow(profile.f(t_small) / f0, n - 1);
    r.limit_error = std::abs(r.limit_at_zero - r.area_A) / r.area_A;

    const auto non_increasing = [&](const std::vector<double>& v) {
        for (std::size_t k = 1; k < v.size(); ++k)
            if (v[k] > v[k - 1] + options.monotone_tol * std::max(1.0, std::abs(v[k - 1]))) return false;
        return true;
    };
    r.monotone_area = non_increasing(r.area_ratio);
    r.monotone_vol = non_increasing(r.vol_ratio);
    r.monotone = r.monotone_area && r.monotone_vol;
    for (std::size_t k = 0; k < r.area_ratio.size(); ++k) {
        const double prev = k == 0 ? r.limit_at_zero : r.area_ratio[k - 1];
        r.rigidity_flags.push_back(std::abs(r.area_ratio[k] - prev) <=
                                   options.flat_tol * std::max(1.0, std::abs(prev)));
    }
    const auto& P = profile.params();
    r.ccc_holds = grw::ccc_check(st, region.sigma, P.kappa, P.beta, options.ccc).holds;
    return r;
}

MetricSampler normal_metric_sampler(const Spacetime& st, const Hypersurface& sigma) {
    return [st, sigma](const Vector& x, double t) {
        if (t == 0.0) {
            const auto sh = grw::shape_operator(st, sigma, x);
            return MetricSample{Matrix::Identity(sh.S.rows(), sh.S.cols()), sh.S};
        }
        grw::GeodesicOptions go;
        go.with_jacobi = true;
        const auto tr = grw::normal_geodesic(st, sigma, x, t, go);
        if (tr.truncated) throw DomainError("normal geodesic leaves the interval before the sample time");
        const auto& s = tr.back();
        return MetricSample{s.J.transpose() * s.J, s.Jp * s.J.inverse()};
    };
}

SplittingReport splitting_reconstruct(const MetricSampler& sampler, const model::WarpingProfile& profile,
                                      const std::vector<double>& t_grid, const std::vector<Vector>& fiber_samples,
                                      const SplittingOptions& options) {
    check_grid(t_grid);
    SplittingReport rep;
    std::vector<std::vector<MetricSample>> samples;
    for (const auto& x : fiber_samples) {
        auto& row = samples.emplace_back();
        for (const double t : t_grid) {
            row.push_back(sampler(x, t));
            const Matrix& S = row.back().S;
            const double h = profile.f_prime(t) / profile.f(t);
            const double defect =
                (S - h * Matrix::Identity(S.rows(), S.cols())).norm() / std::max(1.0, std::abs(h));
            if (defect >= rep.worst_anisotropy) {
                rep.worst_anisotropy = defect;
                rep.worst_x = x;
                rep.worst_t = t;
            }
            ++rep.samples;
        }
    }
    rep.precondition_ok = rep.samples > 0 && rep.worst_anisotropy < options.isotropy_tol;
    if (!rep.precondition_ok) return rep;

    rep.max_error = 0.0;
    numerics::OdeOptions ode;
    ode.rtol = 1e-12;
    ode.atol = 1e-15;
    for (std::size_t i = 0; i < fiber_samples.size(); ++i) {
        const MetricSample h0 = sampler(fiber_samples[i], 0.0);
        const auto m = h0.h.rows();
        const numerics::Rhs rhs = [&profile](double t, const numerics::State& y, numerics::State& dy) {
            dy = 2.0 * profile.f_prime(t) / profile.f(t) * y;
        };
        numerics::State y = Eigen::Map<const numerics::State>(h0.h.data(), m * m);
        double t0 = 0.0;
        for (std::size_t k = 0; k < t_grid.size(); ++k) {
            if (t_grid[k] > t0) {
                const auto out = numerics::integrate(rhs, t0, y, t_grid[k], ode);
                if (!out.ok()) throw IntegrationError("metric evolution failed", out.t,
                                                      std::vector<double>(out.y.data(), out.y.data() + out.y.size()));
                y = out.y;
                t0 = t_grid[k];
            }
            const Matrix h = Eigen::Map<const Matrix>(y.data(), m, m);
            const Matrix& direct = samples[i][k].h;
            rep.max_error = std::max(rep.max_error, (h - direct).norm() / direct.norm());
        }
    }
    rep.passed = rep.max_error < options.pass_tol;
    return rep;
}

SplittingReport splitting_reconstruct(const Spacetime& st, const Hypersurface& sigma,
                                      const model::WarpingProfile& profile, const std::vector<double>& t_grid,
                                      const std::vector<Vector>& fiber_samples, const SplittingOptions& options) {
    return splitting_reconstruct(normal_metric_sampler(st, sigma), profile, t_grid, fiber_samples, options);
}

std::vector<RegionSpec> default_exhaustion(const Spacetime& st, const Hypersurface& sigma, std::size_t resolution) {
    std::vector<RegionSpec> out;
    for (const double r : {1.0, 2.0, 4.0, 8.0})
        out.push_back(RegionSpec::ball(sigma, Vector::Zero(st.fiber_dim()), r, resolution));
    return out;
}

MaxVolumeVerdict max_volume_check(const Spacetime& st, const std::vector<RegionSpec>& exhaustion,
                                  const model::WarpingProfile& profile, const MaxVolumeOptions& options) {
    const double b = profile.upper_end();
    if (!std::isfinite(b))
        throw DomainError("max_volume_check needs kappa > 0 or beta < -(n-1) sqrt|kappa| (finite v_bar)");
    if (exhaustion.empty()) throw DomainError("exhaustion is empty");
    MaxVolumeVerdict v;
    v.v_bar = model::volume_profile(profile).v_bar();
    double min_ratio = inf;
    bool all_equal = true;
    for (const auto& region : exhaustion) {
        const auto ap = area_profile(st, region, {b}, options.area);
        const double ratio = ap.volume.front() / ap.area_A;
        v.ratios.push_back(ratio);
        min_ratio = std::min(min_ratio, ratio);
        if (!(std::abs(ratio - v.v_bar) < options.tol)) all_equal = false;
    }
    v.deficit = v.v_bar - min_ratio;
    v.maximal = all_equal;

    // Cut-free evidence on sampled normals of the first region.
    const auto nodes = fiber_nodes(st, exhaustion.front());
    const std::size_t stride = std::max<std::size_t>(1, nodes.size() / 16);
    v.min_cut_margin = inf;
    std::vector<Vector> picks;
    for (std::size_t i = 0; i < nodes.size(); i += stride) {
        const double c = distance::cut_parameter(st, exhaustion.front().sigma, nodes[i].x, options.area.cut).cut_parameter;
        v.min_cut_margin = std::min(v.min_cut_margin, (c - b) / std::max(1.0, b));
        if (picks.size() < 4) picks.push_back(nodes[i].x);
    }
    v.cut_free = v.min_cut_margin >= -options.tol;

    if (v.maximal) {
        auto grid = default_t_grid(profile, options.reconstruction_times);
        v.reconstruction = splitting_reconstruct(st, exhaustion.front().sigma, profile, grid, picks);
    }
    return v;
}

LimitVerdict limit_criterion(const Spacetime& st, const std::vector<RegionSpec>& exhaustion,
                             const model::WarpingProfile& profile, const std::vector<double>& t_sequence, double tol,
                             const AreaOptions& options) {
    const auto& P = profile.params();
    const int n = P.n;
    if (!(P.kappa <= 0.0 && P.beta > -(n - 1) * std::sqrt(std::abs(P.kappa))))
        throw DomainError("limit_criterion needs kappa <= 0 and beta > -(n-1) sqrt|kappa|");
    for (std::size_t i = 1; i < t_sequence.size(); ++i)
        if (!(t_sequence[i] > t_sequence[i - 1])) throw DomainError("t_sequence must be increasing");
    if (t_sequence.size() < 3) throw DomainError("t_sequence needs at least three times");
    if (exhaustion.empty()) throw DomainError("exhaustion is empty");

    LimitVerdict v;
    v.t = t_sequence;
    const auto vp = model::volume_profile(profile);
    double worst_last = -1.0;
    std::size_t worst = 0;
    for (std::size_t j = 0; j < exhaustion.size(); ++j) {
        const auto ap = area_profile(st, exhaustion[j], t_sequence, options);
        auto& d = v.deficits.emplace_back();
        for (std::size_t k = 0; k < t_sequence.size(); ++k) d.push_back(vp.v(t_sequence[k]) - ap.volume[k] / ap.area_A);
        if (std::abs(d.back()) > worst_last) {
            worst_last = std::abs(d.back());
            worst = j;
        }
    }
    // Deficits are judged relative to v(t), which grows without bound in this regime.
    std::vector<double> scale;
    for (const double t : t_sequence) scale.push_back(std::max(1.0, vp.v(t)));
    std::vector<double> d;
    for (std::size_t k = 0; k < t_sequence.size(); ++k) d.push_back(v.deficits[worst][k] / scale[k]);
    const std::size_t K = d.size();
    const double d1 = d[K - 3], d2 = d[K - 2], d3 = d[K - 1];
    double max_abs = 0.0;
    for (const auto& row : v.deficits)
        for (std::size_t k = 0; k < K; ++k) max_abs = std::max(max_abs, std::abs(row[k]) / scale[k]);
    const double g1 = d2 - d1, g2 = d3 - d2;
    if (max_abs < tol) {
        v.trend = "zero";
        v.limit_estimate = d3;
    } else if (std::abs(g2) < std::abs(g1) && std::abs(g1 - g2) > 0.0) {
        v.limit_estimate = d3 - g2 * g2 / (g2 - g1);
        v.trend = std::abs(v.limit_estimate) < tol ? "vanishing" : "persistent";
    } else {
        v.limit_estimate = d3;
        v.trend = std::abs(d3) > std::abs(d2) + tol ? "growing" : "persistent";
    }
    v.maximal_in_limit = std::abs(v.limit_estimate) < tol;
    return v;
}

NonrigidReport nonrigid_example(double kappa, double beta, double beta_tilde1, double beta_tilde2, int n,
                                double t_compare) {
    const double edge = -(n - 1) * std::sqrt(std::abs(kappa));
    if (!(kappa <= 0.0 && beta > edge))
        throw DomainError("nonrigid_example needs kappa <= 0 and beta > -(n-1) sqrt|kappa|");
    for (const double bt : {beta_tilde1, beta_tilde2})
        if (!(bt >= edge && bt <= beta)) throw DomainError("beta~ must lie in [-(n-1) sqrt|kappa|, beta]");

    NonrigidReport r;
    r.beta_tilde1 = beta_tilde1;
    r.beta_tilde2 = beta_tilde2;
    r.t_compare = t_compare;
    distance::CutOptions co;
    co.horizon = 10.0;
    const auto probe = [&](double bt, bool& ccc, bool& cut_inf) {
        const auto prof = model::build_profile({kappa, bt, n});
        const auto st = Spacetime::from_profile(prof);
        const auto sigma = Hypersurface::slice(0.0);
        ccc = grw::ccc_check(st, sigma, kappa, beta).holds;
        cut_inf = std::isinf(distance::cut_parameter(st, sigma, Vector::Zero(n - 1), co).cut_parameter);
        return model::volume_profile(prof).v(t_compare);
    };
    r.v1 = probe(beta_tilde1, r.ccc1, r.cut_infinite1);
    r.v2 = probe(beta_tilde2, r.ccc2, r.cut_infinite2);
    r.relative_gap = std::abs(r.v1 - r.v2) / std::max(std::abs(r.v1), std::abs(r.v2));
    r.distinct = r.relative_gap > 0.01;
    r.demonstrates = r.ccc1 && r.ccc2 && r.cut_infinite1 && r.cut_infinite2 && r.distinct;
    return r;
}

nlohmann::json to_json(const ComparisonReport& r) {
    nlohmann::json j;
    j["t"] = r.t;
    j["area_ratio"] = r.area_ratio;
    j["vol_ratio"] = r.vol_ratio;
    j["rigidity_flags"] = r.rigidity_flags;
    j["isotropy_defect"] = r.isotropy_defect;
    j["mean_curvature_excess"] = r.mean_curvature_excess;
    j["monotone_area"] = r.monotone_area;
    j["monotone_vol"] = r.monotone_vol;
    j["monotone"] = r.monotone;
    j["area_A"] = r.area_A;
    j["limit_at_zero"] = r.limit_at_zero;
    j["limit_error"] = r.limit_error;
    j["ccc_holds"] = r.ccc_holds;
    j["excluded_max"] = r.excluded_max;
    return j;
}

nlohmann::json to_json(const SplittingReport& r) {
    nlohmann::json j;
    j["precondition_ok"] = r.precondition_ok;
    j["worst_anisotropy"] = r.worst_anisotropy;
    j["worst_x"] = std::vector<double>(r.worst_x.data(), r.worst_x.data() + r.worst_x.size());
    j["worst_t"] = r.worst_t;
    j["max_error"] = std::isfinite(r.max_error) ? nlohmann::json(r.max_error) : nlohmann::json(nullptr);
    j["passed"] = r.passed;
    j["samples"] = r.samples;
    return j;
}

nlohmann::json to_json(const MaxVolumeVerdict& r) {
    nlohmann::json j;
    j["v_bar"] = r.v_bar;
    j["ratios"] = r.ratios;
    j["deficit"] = r.deficit;
    j["maximal"] = r.maximal;
    j["min_cut_margin"] = std::isfinite(r.min_cut_margin) ? nlohmann::json(r.min_cut_margin) : nlohmann::json("inf");
    j["cut_free"] = r.cut_free;
    j["reconstruction"] = r.reconstruction ? to_json(*r.reconstruction) : nlohmann::json(nullptr);
    return j;
}

nlohmann::json to_json(const LimitVerdict& r) {
    nlohmann::json j;
    j["t"] = r.t;
    j["deficits"] = r.deficits;
    j["limit_estimate"] = r.limit_estimate;
    j["maximal_in_limit"] = r.maximal_in_limit;
    j["trend"] = r.trend;
    return j;
}

nlohmann::json to_json(const NonrigidReport& r) {
    return {{"beta_tilde", {r.beta_tilde1, r.beta_tilde2}},
            {"ccc", {r.ccc1, r.ccc2}},
            {"cut_infinite", {r.cut_infinite1, r.cut_infinite2}},
            {"v", {r.v1, r.v2}},
            {"t_compare", r.t_compare},
            {"relative_gap", r.relative_gap},
            {"distinct", r.distinct},
            {"demonstrates", r.demonstrates}};
}

void write_csv(std::ostream& os, const ComparisonReport& r) {
    os << "t,area_ratio,vol_ratio,rigidity_flag\n";
    os.precision(15);
    for (std::size_t k = 0; k < r.t.size(); ++k)
        os << r.t[k] << ',' << r.area_ratio[k] << ',' << r.vol_ratio[k] << ',' << (r.rigidity_flags[k] ? 1 : 0) << '\n';
}

}  // namespace lorentz_compare::comparison
