#pragma once

// Scalar and matrix Riccati flows S' + S^2 + R = 0 with blow-up detection, and
// the trace comparison against the model solution s_kappa.

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <random>
#include <vector>

namespace lorentz_compare::riccati {

using Matrix = Eigen::MatrixXd;

/// t -> R(t), a symmetric dim x dim curvature operator.
using CurvatureField = std::function<Matrix(double)>;

struct RiccatiState {
    int dim = 0;
    double t = 0.0;
    Matrix S;
    double trace = 0.0;
    Matrix R;  // curvature operator at t
};

enum class BlowUpSign { none, plus_infinity, minus_infinity };

struct RiccatiSolution {
    std::vector<RiccatiState> samples;  // strictly increasing in t
    double blow_up_time;                // +inf (forward) / -inf (backward) when no blow-up
    BlowUpSign blow_up_sign = BlowUpSign::none;
};

enum class Direction { forward, backward };

struct RiccatiOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double blow_up_threshold = 1e8;  // on |tr S|
    double bisection_tol = 1e-9;     // in t
    double max_step = 0.05;          // caps the spacing of recorded samples
};

struct InitialValue {
    double t0 = 0.0;
    Matrix S0;
};

/// Start at t_start > 0 from S = (s_kappa(t_start) - epsilon0) Id, the proxy for the
/// limit condition lim_{t->0} (s_kappa(t) - tr S / dim) = epsilon0.
struct AsymptoticStart {
    double kappa = 0.0;
    double epsilon0 = 0.0;
    double t_start = 1e-4;
};

/// s' + s^2 + kappa = 0 from s(t0) = s0 toward `horizon` (absolute time).
RiccatiSolution integrate_scalar(double kappa, double t0, double s0, Direction direction,
                                 double horizon, const RiccatiOptions& options = {});

/// Matrix flow from an explicit initial value. Throws DomainError on a non-symmetric R
/// sample and IntegrationError (carrying the last state) on step-size underflow.
RiccatiSolution integrate_matrix(const CurvatureField& R, int dim, const InitialValue& init,
                                 double horizon, const RiccatiOptions& options = {},
                                 Direction direction = Direction::forward);

RiccatiSolution integrate_matrix(const CurvatureField& R, int dim, const AsymptoticStart& init,
                                 double horizon, const RiccatiOptions& options = {});

struct ComparisonVerdict {
    bool holds = true;
    std::vector<double> times;
    std::vector<double> margin;          // dim * s_kappa(t) - tr S(t)
    std::vector<double> equality_times;  // |margin| below tolerance
    bool rigidity_confirmed = false;
    double first_violation_time;         // NaN when the bound holds
    double min_margin;
};

/// Margin of tr S <= dim * s_kappa on the sample grid. Tolerances scale with
/// max(1, |dim * s_kappa(t)|) so the large values near t = 0 are compared relatively, and
/// near a pole they also absorb a 1e-9 shift in t (the blow-up bisection resolution).
/// Rigidity is confirmed when an equality time exists and every earlier sample has
/// S = s_kappa Id and R = kappa Id within tolerance.
ComparisonVerdict comparison_verdict(const RiccatiSolution& solution, double kappa,
                                     double tol = 1e-6);

/// CSV with columns t,trace,margin.
void write_csv(std::ostream& os, const RiccatiSolution& solution, double kappa);

/// Q diag(u) Q^T with Q orthogonal (QR of a Gaussian matrix) and u ~ U[0, 1].
Matrix random_psd(int dim, std::mt19937_64& rng);

}  // namespace lorentz_compare::riccati
