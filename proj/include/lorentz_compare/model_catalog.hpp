#pragma once

// Comparison model spaces: the warped products (a, b) x_f Sigma_k whose warping
// functions saturate the timelike Ricci bound f'' + kappa f = 0 and whose t = 0
// slice has mean curvature exactly beta.

#include <nlohmann/json.hpp>

#include <string_view>

namespace lorentz_compare::model {

struct ModelParams {
    double kappa = 0.0;  // timelike Ricci lower-bound constant
    double beta = 0.0;   // upper bound for the mean curvature of Sigma
    int n = 2;           // spacetime dimension
};

/// One row per warping-function family. Ties |beta| = (n-1) sqrt|kappa| use the exponential row.
enum class Regime {
    negative_cosh,          // kappa < 0, |x| < 1
    negative_exp,           // kappa < 0, |x| = 1
    negative_sinh_expanding,  // kappa < 0, x > 1
    negative_sinh_collapsing, // kappa < 0, x < -1
    zero_flat,              // kappa = 0, beta = 0
    zero_linear_expanding,  // kappa = 0, beta > 0
    zero_linear_collapsing, // kappa = 0, beta < 0
    positive_sin_expanding, // kappa > 0, beta > 0
    positive_sin_collapsing,// kappa > 0, beta < 0
    positive_cos,           // kappa > 0, beta = 0
};

std::string_view regime_tag(Regime r);

/// x = beta / ((n-1) sqrt|kappa|) decides the kappa < 0 rows; the other blocks split on sign(beta).
Regime classify(const ModelParams& p);

struct WarpValues {
    double f = 0.0;
    double df = 0.0;
    double ddf = 0.0;
};

class WarpingProfile {
public:
    const ModelParams& params() const noexcept { return params_; }
    Regime regime() const noexcept { return regime_; }
    double c() const noexcept { return c_; }
    int fiber_curvature() const noexcept { return fiber_curvature_; }
    double lower_end() const noexcept { return lower_; }
    double upper_end() const noexcept { return upper_; }
    bool upper_end_finite() const noexcept;

    double f(double t) const;
    double f_prime(double t) const;
    double f_second(double t) const;
    WarpValues eval(double t) const;

    /// Closed-form mean curvature (n-1) f'/f of the t-slice.
    double H(double t) const;

    friend WarpingProfile build_profile(const ModelParams& params);

private:
    WarpingProfile() = default;

    ModelParams params_;
    Regime regime_ = Regime::zero_flat;
    double c_ = 0.0;
    double root_ = 0.0;  // sqrt|kappa|
    int fiber_curvature_ = 0;
    double lower_ = 0.0;
    double upper_ = 0.0;
};

/// Throws DomainError for n < 2 or non-finite parameters.
WarpingProfile build_profile(const ModelParams& params);

/// Maximal solution of s' + s^2 + kappa = 0 with a pole at t = 0:
/// sqrt(k) cot(sqrt(k) t), 1/t, sqrt|k| coth(sqrt|k| t). Requires t > 0 and,
/// for kappa > 0, t < pi / sqrt(kappa).
double s_kappa(double kappa, double t);

/// Pole of s_kappa past t = 0 (pi / sqrt(kappa) or infinity).
double s_kappa_horizon(double kappa);

/// Relative future-ball volume of the model, normalised by the base area:
/// v(t) = f(0)^{-(n-1)} int_0^t f^{n-1}, frozen at v_bar past the upper end. v_bar is the
/// limit of v at the upper end: finite when b is, and also on the decaying exponential row.
class VolumeProfile {
public:
    explicit VolumeProfile(WarpingProfile profile);

    double v(double t) const;
    double v_bar() const noexcept { return v_bar_; }
    const WarpingProfile& profile() const noexcept { return profile_; }

private:
    WarpingProfile profile_;
    double v_bar_;
};

VolumeProfile volume_profile(const WarpingProfile& profile);

/// {kappa, beta, n, c, fiber_curvature, b, regime_tag}; an infinite b is written as "inf".
nlohmann::json to_json(const WarpingProfile& profile);

}  // namespace lorentz_compare::model
