#pragma once

// Busemann functions of Sigma-rays by truncated limits, asymptotes, level sets, and the
// support mean-curvature and co-ray checks.

#include "lorentz_compare/grw_spacetime.hpp"
#include "lorentz_compare/lorentz_distance.hpp"

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace lorentz_compare::busemann {

using grw::Hypersurface;
using grw::Point;
using grw::Spacetime;
using grw::Tangent;
using grw::Vector;

struct SigmaRay {
    Spacetime spacetime;
    Hypersurface sigma;
    Vector foot;          // fiber point of gamma(0)
    Point start;
    Tangent normal;
    double a;             // length (end of the normal geodesic's interval), may be infinite

    Point at(double r) const;
};

/// The unit normal geodesic of Sigma over `foot`. Its length is where it leaves the time
/// interval (infinite when it never does before `horizon`).
SigmaRay make_ray(const Spacetime& st, const Hypersurface& sigma, const Vector& foot, double horizon = 1e6);

struct ScheduleOptions {
    double r0 = 0.0;              // 0 picks a / 2 (finite a) or 1 (infinite a)
    double finite_cap = 1e-3;     // stop at a - finite_cap
    double infinite_cap = 1e6;    // doubling stops here when a is infinite
};

/// Geometric approach a - (a - r0) 2^{-k} for finite a; doubling r0 2^k for infinite a.
std::vector<double> default_schedule(const SigmaRay& ray, const ScheduleOptions& options = {});

struct Truncation {
    double r;
    double value;  // r - tau_x(gamma(r))
};

struct BusemannValue {
    double value = 0.0;        // last truncation
    std::vector<Truncation> truncations;
    double tail_bound = 0.0;   // gap between the last two truncations
    double extrapolated = 0.0; // linear extrapolation of the last two truncations to r = a
    bool monotone = true;      // nonincreasing within 1e-8
    std::size_t skipped = 0;   // schedule points not yet in the future of x
};

struct BusemannOptions {
    double monotone_tol = 1e-8;
    double stop_tol = 1e-13;   // stop early once successive truncations agree this closely
};

/// Throws DomainError when x is not in the past of any scheduled ray point.
BusemannValue busemann(const Point& x, const SigmaRay& ray, const std::vector<double>& schedule,
                       const BusemannOptions& options = {});

struct AsymptoteResult {
    std::vector<Tangent> velocities;  // initial unit velocities of the maximizers to gamma(r_k)
    Tangent limit;
    double cauchy_gap = 0.0;          // max difference over the last three velocities
    bool converged = false;
    grw::GeodesicTrace trace;         // the limit geodesic from p
    std::vector<double> check_times;
    std::vector<double> check_errors; // b(alpha(t)) - t - b(p)
    double b_p = 0.0;
    bool property_holds = false;
};

struct AsymptoteOptions {
    double cauchy_tol = 1e-5;
    double property_tol = 2e-4;
    std::vector<double> check_times{0.25, 0.5, 1.0};
    bool richardson = true;  // quadratic extrapolation of velocities toward r = a (needs 5 maximizers)
};

AsymptoteResult asymptote(const Point& p, const SigmaRay& ray, const std::vector<double>& schedule,
                          const AsymptoteOptions& options = {});

/// Point on the level set {b = level} above fiber point x, by bisection in t.
Point level_point(const SigmaRay& ray, const Vector& x, double level, const std::vector<double>& schedule,
                  double t_tol = 1e-10);

struct SupportSample {
    Point p;
    double b_p = 0.0;
    std::vector<double> s;
    std::vector<double> H;       // past-sphere mean curvature at p
    std::vector<double> bound;   // -(n-1) s_kappa(s)
    double level_margin = 0.0;   // H at the largest s (extrapolated in 1/s for infinite a) + (n-1) s_kappa(a - t_level)
};

struct SupportReport {
    std::vector<SupportSample> samples;
    double worst_margin = std::numeric_limits<double>::infinity();
    double worst_level_margin = std::numeric_limits<double>::infinity();
    std::size_t excluded = 0;
    bool holds = false;
};

struct SupportOptions {
    std::size_t sample_budget = 8;
    std::uint64_t seed = 3;
    double fiber_radius = 0.5;
    double tol = 1e-5;
    std::size_t s_points = 12;
    double infinite_s_cap = 1e5;
};

SupportReport support_bound_check(const SigmaRay& ray, double t_level, double kappa,
                                  const std::vector<double>& schedule, const SupportOptions& options = {});

struct CoRayReport {
    bool skipped = false;
    std::string reason;
    std::size_t checked = 0;
    double worst_gap = 0.0;
    bool holds = false;
};

struct CoRayOptions {
    double neighborhood_radius = 0.5;
    std::size_t sample_budget = 6;
    std::size_t t_points = 6;
    std::uint64_t seed = 5;
    double tol = 1e-5;
    double end_margin = 1e-3;
};

/// Precondition gate: CCC(kappa, beta) must hold, kappa > 0 or beta <= -(n-1) sqrt|kappa|,
/// and the ray must have the maximal length b. Otherwise the report is marked skipped.
CoRayReport co_ray_check(const SigmaRay& ray, double kappa, double beta, const CoRayOptions& options = {});

void write_truncations_csv(std::ostream& os, const BusemannValue& b);
void write_level_set_csv(std::ostream& os, const std::vector<Point>& pts);

}  // namespace lorentz_compare::busemann
