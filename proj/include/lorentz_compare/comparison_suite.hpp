#pragma once

// Areas of future spheres and volumes of future balls over fiber regions of Sigma,
// monotone-ratio reports against a model profile, maximal-volume and limit criteria,
// and the splitting reconstruction from the metric evolution dh/dt = 2 (f'/f) h.

#include "lorentz_compare/grw_spacetime.hpp"
#include "lorentz_compare/lorentz_distance.hpp"
#include "lorentz_compare/model_catalog.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace lorentz_compare::comparison {

using grw::Hypersurface;
using grw::Matrix;
using grw::Point;
using grw::Spacetime;
using grw::Vector;

/// Fiber region A over Sigma. Balls use normal polar coordinates about `center` (fiber
/// dimension <= 3); boxes are tensor Gauss grids in the fiber chart.
struct RegionSpec {
    enum class Shape { ball, box };

    Hypersurface sigma = Hypersurface::slice(0.0);
    Shape shape = Shape::ball;
    Vector center;
    double radius = 1.0;
    Vector lower, upper;
    std::size_t resolution = 64;  // nodes per axis

    static RegionSpec ball(Hypersurface sigma, Vector center, double radius, std::size_t resolution = 64);
    static RegionSpec box(Hypersurface sigma, Vector lower, Vector upper, std::size_t resolution = 64);
};

struct FiberNode {
    Vector x;
    double weight = 0.0;  // Sigma-area weight: quadrature weight * f(u)^m * sqrt(1 - |du|^2 / f^2)
};

std::vector<FiberNode> fiber_nodes(const Spacetime& st, const RegionSpec& region);

/// area A; with `doubling_gap` set, also |area(res) - area(2 res)|.
double region_area(const Spacetime& st, const RegionSpec& region, double* doubling_gap = nullptr);

struct AreaOptions {
    double cut_band = 1e-4;        // directions with t > cut - band are dropped
    std::size_t panel_points = 8;  // Gauss-Legendre points per volume panel
    double max_panel = 0.25;
    bool parallel = true;
    distance::CutOptions cut;
};

/// Per-time aggregates over the nodes of a region.
struct AreaProfile {
    std::vector<double> t;
    std::vector<double> area;
    std::vector<double> volume;
    std::vector<double> mean_H;         // area-weighted tr S_t
    std::vector<double> max_H;          // max over nodes of tr S_t
    std::vector<double> min_H;
    std::vector<double> anisotropy;     // max over nodes |S_t - (tr S_t / m) Id|
    std::vector<std::size_t> excluded;  // nodes dropped at this t (cut or band)
    double area_A = 0.0;
    std::size_t nodes = 0;
};

/// t_grid must be increasing and non-negative. The serial and OpenMP paths give
/// identical results: node contributions are summed in node order.
AreaProfile area_profile(const Spacetime& st, const RegionSpec& region, const std::vector<double>& t_grid,
                         const AreaOptions& options = {});

double area_sphere(const Spacetime& st, const RegionSpec& region, double t, const AreaOptions& options = {});
double vol_ball(const Spacetime& st, const RegionSpec& region, double t, const AreaOptions& options = {});

/// 128 points approaching b geometrically (stopping at b - 1e-3 b) for finite b, else a
/// uniform grid on (0, horizon].
std::vector<double> default_t_grid(const model::WarpingProfile& profile, std::size_t count = 128,
                                   double horizon = 10.0);

struct ComparisonReport {
    std::vector<double> t;
    std::vector<double> area_ratio;   // area S_A(t) / (f_model(t) / f_model(0))^{n-1}
    std::vector<double> vol_ratio;    // vol B_A(t) / v_model(t)
    std::vector<bool> rigidity_flags; // ratio flat against the previous sample
    std::vector<double> isotropy_defect;  // max |S_t - (f'/f)_model Id| / max(1, |f'/f|)
    std::vector<double> mean_curvature_excess;  // max over nodes of tr S_t - H_model(t)
    bool monotone_area = false;
    bool monotone_vol = false;
    bool monotone = false;
    double area_A = 0.0;
    double limit_at_zero = 0.0;       // area ratio at t = 1e-4 min(1, b)
    double limit_error = 0.0;         // |limit_at_zero - area A| / area A
    bool ccc_holds = false;
    std::size_t excluded_max = 0;
};

struct ReportOptions {
    double monotone_tol = 1e-8;
    double flat_tol = 1e-8;
    AreaOptions area;
    grw::CccOptions ccc;
};

ComparisonReport monotonicity_report(const Spacetime& st, const RegionSpec& region,
                                     const model::WarpingProfile& profile, const std::vector<double>& t_grid,
                                     const ReportOptions& options = {});

struct MetricSample {
    Matrix h;  // fiber metric of the level set pulled back to Sigma (orthonormal frame at t = 0)
    Matrix S;  // shape operator of the level set
};
using MetricSampler = std::function<MetricSample(const Vector& x, double t)>;

struct SplittingReport {
    bool precondition_ok = false;
    double worst_anisotropy = 0.0;   // max |S_t - (f'/f) Id| / max(1, |f'/f|)
    Vector worst_x;
    double worst_t = 0.0;
    double max_error = std::numeric_limits<double>::infinity();  // relative, ODE vs samples
    bool passed = false;
    std::size_t samples = 0;
};

struct SplittingOptions {
    double isotropy_tol = 1e-6;
    double pass_tol = 1e-6;
};

/// Uses the normal Jacobi propagator from Sigma: h(t) = J^T J, S = J' J^{-1}.
MetricSampler normal_metric_sampler(const Spacetime& st, const Hypersurface& sigma);

SplittingReport splitting_reconstruct(const MetricSampler& sampler, const model::WarpingProfile& profile,
                                      const std::vector<double>& t_grid, const std::vector<Vector>& fiber_samples,
                                      const SplittingOptions& options = {});
SplittingReport splitting_reconstruct(const Spacetime& st, const Hypersurface& sigma,
                                      const model::WarpingProfile& profile, const std::vector<double>& t_grid,
                                      const std::vector<Vector>& fiber_samples, const SplittingOptions& options = {});

struct MaxVolumeVerdict {
    double v_bar = 0.0;
    std::vector<double> ratios;      // vol B_K / area K per region
    double deficit = 0.0;            // v_bar - min ratio
    bool maximal = false;
    double min_cut_margin = 0.0;     // min over sampled normals of cut - b (scaled)
    bool cut_free = false;
    std::optional<SplittingReport> reconstruction;
};

struct MaxVolumeOptions {
    double tol = 1e-6;
    AreaOptions area;
    std::size_t reconstruction_times = 32;
};

/// Requires kappa > 0 or beta < -(n-1) sqrt|kappa| (finite v_bar); throws DomainError otherwise.
MaxVolumeVerdict max_volume_check(const Spacetime& st, const std::vector<RegionSpec>& exhaustion,
                                  const model::WarpingProfile& profile, const MaxVolumeOptions& options = {});

/// Concentric fiber balls of radii 1, 2, 4, 8 about the chart origin (clipped on spheres).
std::vector<RegionSpec> default_exhaustion(const Spacetime& st, const Hypersurface& sigma,
                                           std::size_t resolution = 32);

struct LimitVerdict {
    std::vector<double> t;
    std::vector<std::vector<double>> deficits;  // per region: v_model(t) - vol B_K(t) / area K
    double limit_estimate = 0.0;                // Aitken extrapolation of deficit / max(1, v), worst region
    bool maximal_in_limit = false;
    std::string trend;                          // "zero", "vanishing", "persistent", "growing"
};

/// Requires kappa <= 0 and beta > -(n-1) sqrt|kappa|; throws DomainError otherwise or when
/// t_sequence is not increasing.
LimitVerdict limit_criterion(const Spacetime& st, const std::vector<RegionSpec>& exhaustion,
                             const model::WarpingProfile& profile, const std::vector<double>& t_sequence,
                             double tol = 1e-6, const AreaOptions& options = {});

struct NonrigidReport {
    double beta_tilde1 = 0.0, beta_tilde2 = 0.0;
    bool ccc1 = false, ccc2 = false;
    bool cut_infinite1 = false, cut_infinite2 = false;
    double v1 = 0.0, v2 = 0.0;       // v profiles at t_compare
    double t_compare = 2.0;
    double relative_gap = 0.0;
    bool distinct = false;
    bool demonstrates = false;       // both pass CCC(kappa, beta), cut-free, and distinct
};

/// Both beta~ must lie in [-(n-1) sqrt|kappa|, beta]; throws DomainError otherwise.
NonrigidReport nonrigid_example(double kappa, double beta, double beta_tilde1, double beta_tilde2, int n,
                                double t_compare = 2.0);

nlohmann::json to_json(const ComparisonReport& r);
nlohmann::json to_json(const SplittingReport& r);
nlohmann::json to_json(const MaxVolumeVerdict& r);
nlohmann::json to_json(const LimitVerdict& r);
nlohmann::json to_json(const NonrigidReport& r);

/// Columns t, area_ratio, vol_ratio, rigidity_flag.
void write_csv(std::ostream& os, const ComparisonReport& r);

}  // namespace lorentz_compare::comparison
