#pragma once

// Time separation to points and hypersurfaces, cut parameters, null reach, and the
// reverse-triangle / d'Alembertian comparison checks.

#include "lorentz_compare/grw_spacetime.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace lorentz_compare::distance {

using grw::Hypersurface;
using grw::Point;
using grw::Spacetime;
using grw::Tangent;
using grw::Vector;

struct Diagnostics {
    std::size_t multistart_count = 0;
    double bracket_width = 0.0;
    bool converged = true;
    std::string note;
};

struct DistanceResult {
    double value = 0.0;
    /// (t_q - t_foot) - value, evaluated without cancellation; NaN when not causally related.
    double deficit = std::numeric_limits<double>::quiet_NaN();
    bool causal = false;
    Point foot;                       // start of the maximizer (p itself for point targets)
    Tangent initial_velocity;         // unit tangent of the maximizer at the foot
    double angular_momentum = 0.0;    // f^2 sigma' of the maximizer
    std::optional<grw::GeodesicTrace> maximizer;
    Diagnostics diagnostics;
};

struct TauOptions {
    bool want_maximizer = false;
    bool with_jacobi = false;        // J(0) = 0, J'(0) = Id along the maximizer
    double maximizer_max_step = std::numeric_limits<double>::infinity();
    int max_windings = 3;            // extra great-circle candidates on spherical fibers
};

/// Maximises geodesic length over the angular-momentum family joining p to q. For each
/// fiber-distance candidate d the shooting equation
///   int_{t_p}^{t_q} L / (|f| sqrt(f^2 + L^2)) dt = d
/// is monotone in L and solved by bracketing; the length is int |f| / sqrt(f^2 + L^2) dt.
DistanceResult tau_point(const Spacetime& st, const Point& p, const Point& q, const TauOptions& options = {});

/// int_{t0}^{t1} dt / |f|: fiber distance reached by null geodesics over [t0, t1].
double null_fiber_limit(const Spacetime& st, double t0, double t1);

struct SigmaOptions {
    bool force_search = false;      // run the foot-point search even for slices
    bool want_maximizer = false;
    std::size_t multistart = 32;
    double search_radius = 0.0;     // 0 picks 1.5 x the null reach from the foot below q
    double x_tol = 1e-10;
};

DistanceResult tau_sigma(const Spacetime& st, const Hypersurface& sigma, const Point& q,
                         const SigmaOptions& options = {});

struct TriangleReport {
    std::size_t chains = 0;
    std::size_t violations = 0;
    std::size_t sigma_violations = 0;
    double worst_margin = std::numeric_limits<double>::infinity();  // (tau_pr - tau_pq - tau_qr) / scale
    double worst_sigma_margin = std::numeric_limits<double>::infinity();
    bool holds = false;
};

struct TriangleOptions {
    std::size_t sample_budget = 1000;
    std::uint64_t seed = 7;
    double tol = 1e-6;
    double max_rapidity = 1.5;
    double max_span = 1.0;
    double horizon = 50.0;
    std::optional<Hypersurface> sigma;  // the Sigma version is checked when set
};

TriangleReport reverse_triangle_check(const Spacetime& st, const TriangleOptions& options = {});

enum class CutCause { conjugate_point, competing_geodesic, horizon };
std::string to_string(CutCause c);

struct CutResult {
    Tangent v;
    double cut_parameter = std::numeric_limits<double>::infinity();
    CutCause cause = CutCause::horizon;
    double focal_time = std::numeric_limits<double>::infinity();
    bool truncated = false;   // the normal geodesic left the t interval
};

struct CutOptions {
    double horizon = 50.0;
    double tol = 1e-6;
    std::size_t scan_points = 64;
    SigmaOptions search;
};

CutResult cut_parameter(const Spacetime& st, const Hypersurface& sigma, const Vector& x,
                        const CutOptions& options = {});

struct NullReachResult {
    double arrival = 0.0;
    bool truncated = false;
};

/// c' = |f(c)| from c(0) = t_start up to parameter r.
NullReachResult null_reach(const Spacetime& st, double t_start, double r);

struct DalembertSample {
    Point q;
    double tau = 0.0;
    double minus_box = 0.0;   // -box tau_p(q) = tr J'J^{-1} along the maximizer
    double bound = 0.0;       // (n-1) s_kappa(tau)
};

/// -box tau_p at q via the Jacobi propagator of the maximizer. Throws DomainError if q is
/// not in the chronological future of p.
DalembertSample dalembert_at(const Spacetime& st, const Point& p, const Point& q, double kappa);

struct DalembertReport {
    std::vector<DalembertSample> samples;
    std::size_t excluded = 0;
    double worst_margin = std::numeric_limits<double>::infinity();  // relative
    bool holds = false;
};

struct DalembertOptions {
    std::size_t sample_budget = 100;
    std::uint64_t seed = 11;
    double tol = 1e-6;
    double max_rapidity = 1.5;
    double max_tau = 1.0;
    double cut_margin = 1e-3;
};

DalembertReport dalembert_check(const Spacetime& st, const Point& p, double kappa,
                                const DalembertOptions& options = {});

nlohmann::json to_json(const DistanceResult& r);

}  // namespace lorentz_compare::distance
