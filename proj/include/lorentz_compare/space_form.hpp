#pragma once

// Closed-form geometry of the simply connected space forms of curvature k in {-1, 0, +1}.
//
// Points are given in normal coordinates at the origin o. Tangent vectors at a point x are
// given in the orthonormal frame obtained by parallel transport of the chart axes along the
// radial geodesic from o to x, so h-norms are plain Euclidean norms of the components.
// Internally everything runs through the standard embedding (R^m, unit sphere in R^{m+1},
// or the upper hyperboloid in Minkowski R^{1,m}).

#include <Eigen/Dense>

namespace lorentz_compare::fiber {

using Vector = Eigen::VectorXd;

class SpaceForm {
public:
    SpaceForm(int curvature, int dim);

    int curvature() const noexcept { return k_; }
    int dim() const noexcept { return m_; }

    /// Generalised sine / cosine: sin, s, sinh and cos, 1, cosh.
    double sn(double r) const;
    double cs(double r) const;

    /// pi on the sphere, infinity otherwise.
    double injectivity_radius() const;

    /// Spherical charts are clamped to radius pi - 1e-6 (the antipode of o has no chart point).
    static constexpr double sphere_chart_limit = 3.141591653589793;

    Vector embed(const Vector& x) const;
    Vector chart(const Vector& X) const;

    /// Frame components at x <-> ambient tangent vectors at embed(x).
    Vector frame_to_ambient(const Vector& x, const Vector& w) const;
    Vector ambient_to_frame(const Vector& x, const Vector& V) const;

    double distance(const Vector& x, const Vector& y) const;

    struct Direction {
        double distance = 0.0;
        Vector w;  // unit frame vector at x pointing to y (zero when y == x)
    };
    Direction log(const Vector& x, const Vector& y) const;

    struct Moved {
        Vector x;  // end point
        Vector w;  // unit velocity, frame components at the end point
    };
    /// Travel a distance s along the geodesic leaving x with unit frame direction w.
    Moved exp(const Vector& x, const Vector& w, double s) const;

    /// Carry frame vector v at x along the geodesic (x, w) for distance s by parallel transport.
    Vector transport(const Vector& x, const Vector& w, double s, const Vector& v) const;

    /// Measure of the geodesic ball of radius r.
    double ball_measure(double r) const;

    /// Density of the metric in normal polar coordinates relative to Euclidean: (sn(r)/r)^{m-1}.
    double polar_density(double r) const;

private:
    double inner(const Vector& A, const Vector& B) const;  // ambient (Minkowski on the hyperboloid)
    Vector origin() const;

    int k_;
    int m_;
};

}  // namespace lorentz_compare::fiber
