#pragma once

// Generalised Robertson-Walker spacetimes -dt^2 + f(t)^2 h_k over a space-form fiber:
// curvature, geodesics with Jacobi propagators, hypersurfaces and their shape operators.

#include "lorentz_compare/model_catalog.hpp"
#include "lorentz_compare/space_form.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace lorentz_compare::grw {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using model::WarpValues;

/// Warping function with two derivatives. Evaluations outside the spacetime interval are
/// allowed to be garbage; callers never rely on them.
struct Warp {
    std::function<WarpValues(double)> eval;
    std::string label;
};

Warp warp_from_profile(const model::WarpingProfile& profile);

class Spacetime {
public:
    Spacetime(int n, int fiber_curvature, Warp warp, double t_min, double t_max);

    static Spacetime from_profile(const model::WarpingProfile& profile);

    int n() const noexcept { return n_; }
    int fiber_dim() const noexcept { return n_ - 1; }
    const fiber::SpaceForm& fiber() const noexcept { return fiber_; }
    double t_min() const noexcept { return t_min_; }
    double t_max() const noexcept { return t_max_; }
    bool contains(double t) const noexcept { return t > t_min_ && t < t_max_; }
    const std::string& label() const noexcept { return warp_.label; }
    const Warp& warp_function() const noexcept { return warp_; }

    WarpValues warp(double t) const { return warp_.eval(t); }
    double f(double t) const { return warp_.eval(t).f; }

private:
    int n_;
    fiber::SpaceForm fiber_;
    Warp warp_;
    double t_min_, t_max_;
};

struct Point {
    double t = 0.0;
    Vector x;  // fiber normal coordinates
};

enum class CausalType { timelike, null, spacelike };

struct Tangent {
    double dt = 0.0;
    Vector dx;  // fiber frame components
    CausalType causal_type = CausalType::spacelike;
};

/// |g(v, v)| < null_band is classified null.
inline constexpr double null_band = 1e-12;

double inner(const Spacetime& st, const Point& p, const Tangent& a, const Tangent& b);
Tangent make_tangent(const Spacetime& st, const Point& p, double dt, const Vector& dx);

/// Ric(v, v) from the warped-product curvature decomposition. Throws unless v is timelike.
double ricci_timelike(const Spacetime& st, const Point& p, const Tangent& v);

/// Eigenvalues of the Jacobi operator R(., c')c' along a geodesic in the plane of the
/// time axis and a fiber geodesic: `in_plane` on the in-plane normal, `transverse` on the
/// remaining fiber directions. dsigma is the fiber speed |dx|_h.
struct JacobiOperator {
    double in_plane;
    double transverse;
};
JacobiOperator jacobi_operator(const Spacetime& st, double t, double dt, double dsigma);

class Hypersurface {
public:
    using Height = std::function<double(const Vector&)>;

    static Hypersurface slice(double t0);
    static Hypersurface graph(Height u, std::string label = "graph");

    bool is_slice() const noexcept { return slice_; }
    double slice_time() const noexcept { return t0_; }
    double height(const Vector& x) const { return slice_ ? t0_ : u_(x); }
    const std::string& label() const noexcept { return label_; }

private:
    bool slice_ = true;
    double t0_ = 0.0;
    Height u_;
    std::string label_;
};

struct GeodesicSample {
    double s = 0.0;
    Point point;
    Tangent tangent;
    Matrix J;   // Jacobi propagator in the parallel frame (empty when not requested)
    Matrix Jp;
};

struct GeodesicTrace {
    std::vector<GeodesicSample> samples;
    double energy = 0.0;            // g(c', c')
    double angular_momentum = 0.0;  // f^2 |dx|_h
    double length = 0.0;
    double param_end = 0.0;         // affine parameter actually reached
    bool truncated = false;         // left the t interval before param_span
    Vector direction;               // unit fiber direction at the start (frame of p)
    Matrix frame;                   // columns: fiber frame basis at p, first column = direction

    const GeodesicSample& back() const { return samples.back(); }
};

struct JacobiInit {
    Matrix J0;
    Matrix Jp0;
};

struct GeodesicOptions {
    double max_step = std::numeric_limits<double>::infinity();
    double rtol = 1e-11;
    double atol = 1e-13;
    bool with_jacobi = false;
    JacobiInit jacobi;  // defaults to J(0) = Id, J'(0) = 0 when empty
    /// Parameters where a sample is recorded exactly (the integration is split there).
    std::vector<double> output_params;
    /// Optional observer called on every accepted sample; return false to stop.
    std::function<bool(const GeodesicSample&)> observer;
};

/// Integrates the Clairaut-reduced system t'' = -f f' s'^2, (f^2 s')' = 0, with the fiber
/// path a closed-form unit-speed space-form geodesic parametrised by s. Stops with
/// truncated = true when t leaves the interval. The Jacobi propagator is only defined for
/// timelike geodesics.
GeodesicTrace geodesic(const Spacetime& st, const Point& p, const Tangent& v, double param_span,
                       const GeodesicOptions& options = {});

/// Future unit normal, shape operator and mean curvature at the Sigma point over fiber point x.
/// S is written in the orthonormal basis of T Sigma that starts the normal geodesic's parallel
/// frame: the in-plane direction first, then the transverse fiber directions.
struct ShapeResult {
    Point foot;
    Tangent normal;
    Matrix S;
    double H = 0.0;
    double richardson_mismatch = 0.0;  // |S(h) - S(h/2)|, zero for slices
    Vector gradient;                    // frame components of du (zero for slices)
};

struct ShapeOptions {
    double h_fd = 1e-3;  // fiber step for graph derivatives (scaled by 1 + |x|)
};

ShapeResult shape_operator(const Spacetime& st, const Hypersurface& sigma, const Vector& x,
                           const ShapeOptions& options = {});

/// Unit-speed normal geodesic from the Sigma point over x, with J(0) = Id and J'(0) = S.
GeodesicTrace normal_geodesic(const Spacetime& st, const Hypersurface& sigma, const Vector& x,
                              double param_span, GeodesicOptions options = {});

struct FocalResult {
    double focal_time = std::numeric_limits<double>::infinity();
    bool found = false;
    bool truncated = false;  // the normal geodesic left the interval first
    double end_time = 0.0;   // parameter reached
};

struct FocalOptions {
    double horizon = 50.0;       // used when the interval is unbounded
    double degenerate = 1e-6;    // |det J|^{1/m} below this at a boundary counts as focal
    double time_tol = 1e-12;
};

FocalResult jacobi_focal_time(const Spacetime& st, const Hypersurface& sigma, const Vector& x,
                              const FocalOptions& options = {});

struct CccReport {
    double ricci_margin = std::numeric_limits<double>::infinity();   // min Ric(v,v) - (n-1) kappa
    double mean_curvature_margin = std::numeric_limits<double>::infinity();  // min beta - H
    bool holds = false;
    bool inconclusive = false;
    std::size_t samples = 0;
    Point worst_ricci_point;
    Vector worst_sigma_point;
};

struct CccOptions {
    std::size_t sample_budget = 256;
    std::uint64_t seed = 1;
    double tol = 1e-9;           // the Ricci test scales it by max(1, size of the curvature terms)
    double fiber_radius = 1.0;   // hypersurface points drawn from this chart ball
    double max_rapidity = 3.0;
    double horizon = 50.0;       // clip for unbounded t intervals
};

CccReport ccc_check(const Spacetime& st, const Hypersurface& sigma, double kappa, double beta,
                    const CccOptions& options = {});

/// f~(t) = f(-t) on the mirrored interval.
Spacetime time_reverse(const Spacetime& st);

}  // namespace lorentz_compare::grw
