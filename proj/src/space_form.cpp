#include "lorentz_compare/space_form.hpp"

#include "lorentz_compare/errors.hpp"
#include "lorentz_compare/numerics/quadrature.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace lorentz_compare::fiber {

SpaceForm::SpaceForm(int curvature, int dim) : k_(curvature), m_(dim) {
    if (curvature < -1 || curvature > 1) throw DomainError("fiber curvature must be -1, 0 or +1");
    if (dim < 1) throw DomainError("fiber dimension must be >= 1");
}

double SpaceForm::sn(double r) const {
    if (k_ > 0) return std::sin(r);
    if (k_ < 0) return std::sinh(r);
    return r;
}

double SpaceForm::cs(double r) const {
    if (k_ > 0) return std::cos(r);
    if (k_ < 0) return std::cosh(r);
    return 1.0;
}

double SpaceForm::injectivity_radius() const {
    return k_ > 0 ? std::numbers::pi : std::numeric_limits<double>::infinity();
}

double SpaceForm::inner(const Vector& A, const Vector& B) const {
    if (k_ == 0) return A.dot(B);
    return k_ * A[0] * B[0] + A.tail(m_).dot(B.tail(m_));
}

Vector SpaceForm::origin() const {
    Vector o = Vector::Zero(m_ + 1);
    o[0] = 1.0;
    return o;
}

Vector SpaceForm::embed(const Vector& x) const {
    if (x.size() != m_) throw DomainError("fiber point has the wrong dimension");
    if (k_ == 0) return x;
    const double r = x.norm();
    Vector X = Vector::Zero(m_ + 1);
    X[0] = cs(r);
    if (r > 0.0) X.tail(m_) = (sn(r) / r) * x;
    return X;
}

Vector SpaceForm::chart(const Vector& X) const {
    if (k_ == 0) return X;
    const Vector s = X.tail(m_);
    const double sn_r = s.norm();
    double r = k_ > 0 ? std::atan2(sn_r, X[0]) : std::asinh(sn_r);
    Vector u = Vector::Zero(m_);
    if (sn_r > 0.0)
        u = s / sn_r;
    else
        u[0] = 1.0;
    if (k_ > 0 && r > sphere_chart_limit) r = sphere_chart_limit;
    return r * u;
}

Vector SpaceForm::frame_to_ambient(const Vector& x, const Vector& w) const {
    if (k_ == 0) return w;
    const double r = x.norm();
    Vector V = Vector::Zero(m_ + 1);
    V.tail(m_) = w;
    if (r == 0.0) return V;
    const Vector u = x / r;
    const double wu = w.dot(u);
    V[0] += wu * (-k_ * sn(r));
    V.tail(m_) += wu * (cs(r) - 1.0) * u;
    return V;
}

Vector SpaceForm::ambient_to_frame(const Vector& x, const Vector& V) const {
    if (k_ == 0) return V;
    const double r = x.norm();
    Vector w = V.tail(m_);
    if (r == 0.0) return w;
    const Vector u = x / r;
    const double vu = w.dot(u);
    const double vt = -sn(r) * V[0] + cs(r) * vu;  // <V, radial velocity>
    return w + (vt - vu) * u;
}

double SpaceForm::distance(const Vector& x, const Vector& y) const {
    if (k_ == 0) return (x - y).norm();
    const Vector X = embed(x), Y = embed(y);
    if (k_ > 0) {
        const double c = X.dot(Y);
        return std::atan2((Y - c * X).norm(), c);
    }
    const double ip = inner(X, Y);
    const Vector P = Y + ip * X;
    return std::asinh(std::sqrt(std::max(0.0, inner(P, P))));
}

SpaceForm::Direction SpaceForm::log(const Vector& x, const Vector& y) const {
    Direction d;
    d.distance = distance(x, y);
    d.w = Vector::Zero(m_);
    if (d.distance == 0.0) return d;
    if (k_ == 0) {
        d.w = (y - x) / d.distance;
        return d;
    }
    const Vector X = embed(x), Y = embed(y);
    const Vector P = Y - (inner(X, Y) / inner(X, X)) * X;
    const double pn = std::sqrt(std::max(0.0, inner(P, P)));
    if (pn < 1e-300) {
        // Antipodal pair on the sphere: every direction reaches y.
        d.w[0] = 1.0;
        return d;
    }
    const Vector w = ambient_to_frame(x, P / pn);
    d.w = w / w.norm();
    return d;
}

SpaceForm::Moved SpaceForm::exp(const Vector& x, const Vector& w, double s) const {
    Moved out;
    if (k_ == 0) {
        out.x = x + s * w;
        out.w = w;
        return out;
    }
    const Vector X = embed(x);
    const Vector U = frame_to_ambient(x, w);
    const Vector Y = cs(s) * X + sn(s) * U;
    const Vector V = -k_ * sn(s) * X + cs(s) * U;
    out.x = chart(Y);
    out.w = ambient_to_frame(out.x, V);
    return out;
}

Vector SpaceForm::transport(const Vector& x, const Vector& w, double s, const Vector& v) const {
    if (k_ == 0) return v;
    const double along = v.dot(w);
    const Vector perp = v - along * w;
    const Moved end = exp(x, w, s);
    return along * end.w + ambient_to_frame(end.x, frame_to_ambient(x, perp));
}

double SpaceForm::ball_measure(double r) const {
    if (r < 0.0) throw DomainError("ball radius must be non-negative");
    if (k_ > 0) r = std::min(r, std::numbers::pi);
    const double pi = std::numbers::pi;
    switch (m_) {
        case 1: return 2.0 * r;
        case 2:
            if (k_ > 0) return 2.0 * pi * (1.0 - std::cos(r));
            if (k_ < 0) return 2.0 * pi * (std::cosh(r) - 1.0);
            return pi * r * r;
        case 3:
            if (k_ > 0) return pi * (2.0 * r - std::sin(2.0 * r));
            if (k_ < 0) return pi * (std::sinh(2.0 * r) - 2.0 * r);
            return 4.0 / 3.0 * pi * r * r * r;
        default: break;
    }
    const double sphere_area = 2.0 * std::pow(pi, 0.5 * m_) / std::tgamma(0.5 * m_);
    const auto q = numerics::integrate_adaptive([&](double s) { return std::pow(sn(s), m_ - 1); }, 0.0, r);
    return sphere_area * q.value;
}

double SpaceForm::polar_density(double r) const {
    if (r == 0.0 || k_ == 0) return 1.0;
    return std::pow(sn(r) / r, m_ - 1);
}

}  // namespace lorentz_compare::fiber
