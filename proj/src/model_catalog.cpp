#include "lorentz_compare/model_catalog.hpp"

#include "lorentz_compare/errors.hpp"
#include "lorentz_compare/numerics/quadrature.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace lorentz_compare::model {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// coth^{-1}(x) for |x| > 1 as atanh(1/x): no cancellation near the regime boundary.
double acoth(double x) { return std::atanh(1.0 / x); }

}  // namespace

std::string_view regime_tag(Regime r) {
    switch (r) {
        case Regime::negative_cosh: return "kappa<0,|x|<1,cosh";
        case Regime::negative_exp: return "kappa<0,|x|=1,exp";
        case Regime::negative_sinh_expanding: return "kappa<0,x>1,sinh";
        case Regime::negative_sinh_collapsing: return "kappa<0,x<-1,sinh";
        case Regime::zero_flat: return "kappa=0,beta=0,const";
        case Regime::zero_linear_expanding: return "kappa=0,beta>0,linear";
        case Regime::zero_linear_collapsing: return "kappa=0,beta<0,linear";
        case Regime::positive_sin_expanding: return "kappa>0,beta>0,sin";
        case Regime::positive_sin_collapsing: return "kappa>0,beta<0,sin";
        case Regime::positive_cos: return "kappa>0,beta=0,cos";
    }
    return "unknown";
}

Regime classify(const ModelParams& p) {
    if (p.n < 2) throw DomainError("spacetime dimension n must be >= 2");
    if (!std::isfinite(p.kappa) || !std::isfinite(p.beta))
        throw DomainError("kappa and beta must be finite");
    if (p.kappa < 0.0) {
        const double x = p.beta / ((p.n - 1) * std::sqrt(-p.kappa));
        if (std::abs(x) == 1.0) return Regime::negative_exp;
        if (std::abs(x) < 1.0) return Regime::negative_cosh;
        return x > 1.0 ? Regime::negative_sinh_expanding : Regime::negative_sinh_collapsing;
    }
    if (p.kappa == 0.0) {
        if (p.beta == 0.0) return Regime::zero_flat;
        return p.beta > 0.0 ? Regime::zero_linear_expanding : Regime::zero_linear_collapsing;
    }
    if (p.beta == 0.0) return Regime::positive_cos;
    return p.beta > 0.0 ? Regime::positive_sin_expanding : Regime::positive_sin_collapsing;
}

WarpingProfile build_profile(const ModelParams& params) {
    WarpingProfile w;
    w.params_ = params;
    w.regime_ = classify(params);
    const double m = params.n - 1;
    const double r = std::sqrt(std::abs(params.kappa));
    w.root_ = r;
    const double x = r > 0.0 ? params.beta / (m * r) : 0.0;
    switch (w.regime_) {
        case Regime::negative_cosh:
            w.c_ = std::atanh(x);
            w.fiber_curvature_ = 1;
            w.lower_ = -inf;
            w.upper_ = inf;
            break;
        case Regime::negative_exp:
            w.c_ = 0.0;
            w.fiber_curvature_ = 0;
            w.lower_ = -inf;
            w.upper_ = inf;
            break;
        case Regime::negative_sinh_expanding:
            w.c_ = acoth(x);
            w.fiber_curvature_ = -1;
            w.lower_ = -w.c_ / r;
            w.upper_ = inf;
            break;
        case Regime::negative_sinh_collapsing:
            w.c_ = acoth(x);
            w.fiber_curvature_ = -1;
            w.lower_ = -inf;
            w.upper_ = -w.c_ / r;
            break;
        case Regime::zero_flat:
            w.c_ = 0.0;
            w.fiber_curvature_ = 0;
            w.lower_ = -inf;
            w.upper_ = inf;
            break;
        case Regime::zero_linear_expanding:
            w.c_ = m / params.beta;
            w.fiber_curvature_ = -1;
            w.lower_ = -w.c_;
            w.upper_ = inf;
            break;
        case Regime::zero_linear_collapsing:
            w.c_ = m / params.beta;
            w.fiber_curvature_ = -1;
            w.lower_ = -inf;
            w.upper_ = -w.c_;
            break;
        case Regime::positive_sin_expanding:
            w.c_ = std::atan(1.0 / x);  // cot^{-1} on (0, pi/2)
            w.fiber_curvature_ = -1;
            w.lower_ = -w.c_ / r;
            w.upper_ = (std::numbers::pi - w.c_) / r;
            break;
        case Regime::positive_sin_collapsing:
            w.c_ = std::atan(1.0 / x);  // cot^{-1} on (-pi/2, 0)
            w.fiber_curvature_ = -1;
            w.lower_ = (-std::numbers::pi - w.c_) / r;
            w.upper_ = -w.c_ / r;
            break;
        case Regime::positive_cos:
            w.c_ = std::numbers::pi / 2.0;
            w.fiber_curvature_ = -1;
            w.lower_ = -std::numbers::pi / (2.0 * r);
            w.upper_ = std::numbers::pi / (2.0 * r);
            break;
    }
    return w;
}

bool WarpingProfile::upper_end_finite() const noexcept { return std::isfinite(upper_); }

WarpValues WarpingProfile::eval(double t) const {
    const double r = root_;
    switch (regime_) {
        case Regime::negative_cosh: {
            const double a = r * t + c_;
            return {std::cosh(a) / r, std::sinh(a), r * std::cosh(a)};
        }
        case Regime::negative_exp: {
            const double s = sgn(params_.beta) * r;
            const double e = std::exp(s * t);
            return {e, s * e, s * s * e};
        }
        case Regime::negative_sinh_expanding:
        case Regime::negative_sinh_collapsing: {
            const double a = r * t + c_;
            return {std::sinh(a) / r, std::cosh(a), r * std::sinh(a)};
        }
        case Regime::zero_flat: return {1.0, 0.0, 0.0};
        case Regime::zero_linear_expanding:
        case Regime::zero_linear_collapsing: return {t + c_, 1.0, 0.0};
        case Regime::positive_sin_expanding:
        case Regime::positive_sin_collapsing: {
            const double a = r * t + c_;
            return {std::sin(a) / r, std::cos(a), -r * std::sin(a)};
        }
        case Regime::positive_cos: {
            const double a = r * t;
            return {std::cos(a) / r, -std::sin(a), -r * std::cos(a)};
        }
    }
    return {};
}

double WarpingProfile::f(double t) const { return eval(t).f; }
double WarpingProfile::f_prime(double t) const { return eval(t).df; }
double WarpingProfile::f_second(double t) const { return eval(t).ddf; }

double WarpingProfile::H(double t) const {
    const double m = params_.n - 1;
    const double r = root_;
    switch (regime_) {
        case Regime::negative_cosh: return m * r * std::tanh(r * t + c_);
        case Regime::negative_exp: return m * sgn(params_.beta) * r;
        case Regime::negative_sinh_expanding:
        case Regime::negative_sinh_collapsing: return m * r / std::tanh(r * t + c_);
        case Regime::zero_flat: return 0.0;
        case Regime::zero_linear_expanding:
        case Regime::zero_linear_collapsing: return m / (t + c_);
        case Regime::positive_sin_expanding:
        case Regime::positive_sin_collapsing: return m * r / std::tan(r * t + c_);
        case Regime::positive_cos: return -m * r * std::tan(r * t);
    }
    return 0.0;
}

double s_kappa(double kappa, double t) {
    if (!(t > 0.0)) throw DomainError("s_kappa requires t > 0");
    if (kappa > 0.0) {
        const double r = std::sqrt(kappa);
        if (r * t >= std::numbers::pi) {
            std::ostringstream msg;
            msg << "s_kappa: t = " << t << " at or beyond the cotangent pole pi/sqrt(kappa)";
            throw DomainError(msg.str());
        }
        return r / std::tan(r * t);
    }
    if (kappa == 0.0) return 1.0 / t;
    const double r = std::sqrt(-kappa);
    return r / std::tanh(r * t);
}

double s_kappa_horizon(double kappa) {
    return kappa > 0.0 ? std::numbers::pi / std::sqrt(kappa) : inf;
}

VolumeProfile::VolumeProfile(WarpingProfile profile) : profile_(std::move(profile)), v_bar_(inf) {
    if (profile_.upper_end_finite()) {
        v_bar_ = v(profile_.upper_end());
    } else if (profile_.regime() == Regime::negative_exp && profile_.params().beta < 0.0) {
        // f decays like exp(-sqrt|kappa| t): the limit is finite although b is not.
        const auto& p = profile_.params();
        v_bar_ = 1.0 / ((p.n - 1) * std::sqrt(-p.kappa));
    }
}

double VolumeProfile::v(double t) const {
    if (std::isnan(t) || t < 0.0) throw DomainError("volume profile requires t >= 0");
    if (t == 0.0) return 0.0;
    const double b = profile_.upper_end();
    if (std::isfinite(v_bar_) && t >= b) return v_bar_;
    const double upper = std::min(t, b);
    const double f0 = profile_.f(0.0);
    const int m = profile_.params().n - 1;
    numerics::QuadratureOptions q;
    q.rel_tol = 1e-13;
    q.abs_tol = 1e-15;
    const auto res = numerics::integrate_adaptive(
        [&](double s) { return std::pow(profile_.f(s) / f0, m); }, 0.0, upper, q);
    return res.value;
}

VolumeProfile volume_profile(const WarpingProfile& profile) { return VolumeProfile(profile); }

nlohmann::json to_json(const WarpingProfile& profile) {
    nlohmann::json j;
    j["kappa"] = profile.params().kappa;
    j["beta"] = profile.params().beta;
    j["n"] = profile.params().n;
    j["c"] = profile.c();
    j["fiber_curvature"] = profile.fiber_curvature();
    if (profile.upper_end_finite())
        j["b"] = profile.upper_end();
    else
        j["b"] = "inf";
    j["regime_tag"] = std::string(regime_tag(profile.regime()));
    return j;
}

}  // namespace lorentz_compare::model
