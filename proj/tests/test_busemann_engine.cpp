#include "lorentz_compare/busemann_engine.hpp"
#include "lorentz_compare/errors.hpp"
#include "lorentz_compare/lorentz_distance.hpp"
#include "lorentz_compare/model_catalog.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace lorentz_compare;
using grw::Hypersurface;
using grw::Point;
using grw::Spacetime;
using grw::Vector;

namespace {

Spacetime flat(int n) {
    return Spacetime(n, 0, {[](double) { return model::WarpValues{1.0, 0.0, 0.0}; }, "flat"}, -oracle::inf, oracle::inf);
}

Spacetime model_st(double kappa, double beta, int n) { return Spacetime::from_profile(model::build_profile({kappa, beta, n})); }

busemann::SigmaRay slice_ray(const Spacetime& st) {
    return busemann::make_ray(st, Hypersurface::slice(0.0), Vector::Zero(st.fiber_dim()));
}

Vector rand_x(int m, double radius, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vector x(m);
    for (int j = 0; j < m; ++j) x[j] = radius * u(rng);
    return x;
}

}  // namespace

TEST_CASE("rays and schedules") {
    const auto st = model_st(1.0, 0.0, 3);
    const auto ray = slice_ray(st);
    CHECK(ray.a == doctest::Approx(oracle::pi / 2).epsilon(1e-12));
    for (double t : {0.1, 0.7, 1.3, 1.5}) {
        distance::SigmaOptions so;
        so.force_search = true;
        CHECK(std::abs(distance::tau_sigma(st, ray.sigma, ray.at(t), so).value - t) < 1e-6);
    }
    const auto sch = busemann::default_schedule(ray);
    CHECK(sch.front() == doctest::Approx(ray.a / 2));
    CHECK(sch.back() == doctest::Approx(ray.a - 1e-3));
    for (std::size_t i = 1; i < sch.size(); ++i) CHECK(sch[i] > sch[i - 1]);

    const auto fr = slice_ray(flat(2));
    CHECK(std::isinf(fr.a));
    const auto fs = busemann::default_schedule(fr);
    CHECK(fs.front() == 1.0);
    CHECK(fs.back() <= 1e6);
    CHECK(fs[1] == 2.0);

    // a graph whose normal runs into the end of the interval
    const auto g = busemann::make_ray(st, Hypersurface::graph([](const Vector& x) { return 0.1 * x[0]; }), Vector::Zero(2), 10.0);
    CHECK(std::isfinite(g.a));
    CHECK(g.a < oracle::pi / 2);
}

TEST_CASE("busemann values") {
    SUBCASE("on the ray, b = t at every truncation") {
        for (const auto& st : {model_st(1.0, 0.0, 3), flat(3), model_st(-1.0, -4.0, 3)}) {
            const auto ray = slice_ray(st);
            const auto sch = busemann::default_schedule(ray);
            for (double t : {0.05, 0.3}) {
                const auto b = busemann::busemann(ray.at(t), ray, sch);
                for (const auto& tr : b.truncations) CHECK(std::abs(tr.value - t) < 1e-12);
                CHECK(b.monotone);
            }
        }
    }
    SUBCASE("model kappa = 1, beta = 0, n = 2: b is t above the ray's fiber point") {
        const auto st = model_st(1.0, 0.0, 2);
        const auto ray = slice_ray(st);
        const auto sch = busemann::default_schedule(ray);
        for (double t : {0.2, 0.6, 1.0}) {
            const auto b = busemann::busemann(Point{t, Vector::Zero(1)}, ray, sch);
            CHECK(std::abs(b.extrapolated - t) < 1e-4);
            // oracle: r - tau_x(gamma(r)) straight from tau_point
            for (const auto& tr : b.truncations)
                CHECK(tr.value == doctest::Approx(tr.r - distance::tau_point(st, Point{t, Vector::Zero(1)}, ray.at(tr.r)).value).epsilon(1e-12));
        }
    }
    SUBCASE("flat product: b = t off the axis after extrapolation") {
        const auto st = flat(3);
        const auto ray = slice_ray(st);
        const auto sch = busemann::default_schedule(ray);
        const auto b = busemann::busemann(Point{0.4, Vector::Constant(2, 0.5)}, ray, sch);
        CHECK(b.monotone);
        CHECK(std::abs(b.extrapolated - 0.4) < 1e-8);
        CHECK(b.value >= b.extrapolated - 1e-12);
        CHECK(b.tail_bound < 1e-5);
    }
    SUBCASE("b >= tau_Sigma, truncations monotone, b increases along causal pairs") {
        for (const auto& st : {model_st(1.0, 0.0, 3), model_st(0.0, -1.0, 3), model_st(-1.0, -4.0, 3)}) {
            const auto ray = slice_ray(st);
            const auto sch = busemann::default_schedule(ray);
            std::mt19937_64 rng(17);
            std::uniform_real_distribution<double> u(0.0, 1.0);
            int tested = 0;
            for (int i = 0; i < 100; ++i) {
                const Point x{ray.a * (0.05 + 0.6 * u(rng)), rand_x(2, 0.6, rng)};
                const auto b = busemann::busemann(x, ray, sch);
                CHECK(b.monotone);
                for (std::size_t k = 1; k < b.truncations.size(); ++k)
                    CHECK(b.truncations[k].value <= b.truncations[k - 1].value + 1e-8);
                CHECK(b.value <= b.truncations.front().value);
                CHECK(b.extrapolated >= distance::tau_sigma(st, ray.sigma, x).value - 1e-4);
                ++tested;
            }
            CHECK(tested == 100);
            for (int i = 0; i < 20; ++i) {
                const Point p{ray.a * (0.05 + 0.3 * u(rng)), rand_x(2, 0.4, rng)};
                const double eta = u(rng);
                Vector d = rand_x(2, 1.0, rng).normalized();
                const auto v = grw::make_tangent(st, p, std::cosh(eta), std::sinh(eta) / st.f(p.t) * d);
                const Point q = grw::geodesic(st, p, v, 0.2 * ray.a * u(rng)).back().point;
                const double bp = busemann::busemann(p, ray, sch).extrapolated;
                const double bq = busemann::busemann(q, ray, sch).extrapolated;
                CHECK(bq >= bp + distance::tau_point(st, p, q).value - 2e-4);
            }
        }
    }
    SUBCASE("x not in the past of the ray") {
        const auto st = flat(2);
        const auto ray = slice_ray(st);
        std::vector<double> sch{1.0, 2.0};
        CHECK_THROWS_AS(busemann::busemann(Point{0.5, Vector::Constant(1, 10.0)}, ray, sch), DomainError);
    }
}

TEST_CASE("level sets are achronal") {
    const auto st = model_st(-1.0, -4.0, 3);
    const auto ray = slice_ray(st);
    const auto sch = busemann::default_schedule(ray);
    std::mt19937_64 rng(23);
    for (double level : {0.05, 0.15}) {
        std::vector<Point> pts;
        for (int i = 0; i < 8; ++i) {
            const Point p = busemann::level_point(ray, rand_x(2, 0.8, rng), level, sch);
            CHECK(std::abs(busemann::busemann(p, ray, sch).extrapolated - level) < 1e-8);
            pts.push_back(p);
        }
        for (const auto& p : pts)
            for (const auto& q : pts) CHECK(distance::tau_point(st, p, q).value < 1e-6);
        std::ostringstream os;
        busemann::write_level_set_csv(os, pts);
        CHECK(os.str().rfind("t,x1,x2\n", 0) == 0);
    }
}

TEST_CASE("asymptotes") {
    SUBCASE("p on the ray: the ray's tail") {
        const auto st = model_st(1.0, 0.0, 3);
        const auto ray = slice_ray(st);
        const auto res = busemann::asymptote(ray.at(0.3), ray, busemann::default_schedule(ray));
        CHECK(res.converged);
        CHECK(res.limit.dx.norm() < 1e-10);
        CHECK(res.limit.dt == doctest::Approx(1.0));
        CHECK(res.property_holds);
    }
    SUBCASE("flat product: vertical through p") {
        const auto st = flat(3);
        const auto ray = slice_ray(st);
        const Point p{0.2, Vector::Constant(2, 0.7)};
        const auto res = busemann::asymptote(p, ray, busemann::default_schedule(ray));
        CHECK(res.converged);
        CHECK(res.limit.dx.norm() < 1e-5);
        CHECK(res.property_holds);
        for (double e : res.check_errors) CHECK(std::abs(e) < 2e-4);
        // oracle: the Minkowski maximizer to (s, 0) has dx / dt = -x / (s - t)
        const auto sch = busemann::default_schedule(ray);
        CHECK(res.velocities.back().dx.norm() / res.velocities.back().dt ==
              doctest::Approx(0.7 * std::sqrt(2.0) / (sch.back() - 0.2)).epsilon(1e-6));
    }
    SUBCASE("asymptotes are maximizing") {
        const auto st = model_st(-1.0, -4.0, 3);
        const auto ray = slice_ray(st);
        const Point p{0.1, Vector::Constant(2, 0.3)};
        const auto res = busemann::asymptote(p, ray, busemann::default_schedule(ray));
        CHECK(res.converged);
        CHECK(res.property_holds);
        for (double t : {0.05, 0.1, 0.2}) {
            const auto tr = grw::geodesic(st, p, res.limit, t);
            CHECK(std::abs(distance::tau_point(st, p, tr.back().point).value - t) < 1e-5);
        }
    }
}

TEST_CASE("support mean-curvature bound") {
    SUBCASE("model: equality") {
        const auto st = model_st(1.0, 0.0, 3);
        const auto ray = slice_ray(st);
        busemann::SupportOptions o;
        o.sample_budget = 4;
        const auto rep = busemann::support_bound_check(ray, 0.4, 1.0, busemann::default_schedule(ray), o);
        CHECK(rep.holds);
        REQUIRE_FALSE(rep.samples.empty());
        for (const auto& s : rep.samples)
            for (std::size_t i = 0; i < s.H.size(); ++i)
                CHECK(std::abs(s.H[i] - s.bound[i]) < 1e-5 * std::max(1.0, std::abs(s.bound[i])));
        // kappa lowered: slack
        const auto weak = busemann::support_bound_check(ray, 0.4, 0.5, busemann::default_schedule(ray), o);
        CHECK(weak.holds);
        CHECK(weak.worst_margin > 1e-3);
    }
    SUBCASE("flat product: H >= 0 in the limit") {
        const auto st = flat(3);
        const auto ray = slice_ray(st);
        busemann::SupportOptions o;
        o.sample_budget = 2;
        const auto rep = busemann::support_bound_check(ray, 0.3, 0.0, busemann::default_schedule(ray), o);
        CHECK(rep.holds);
        CHECK(rep.worst_level_margin >= -1e-5);
    }
}

TEST_CASE("co-ray check") {
    SUBCASE("model: every nearby normal is a ray") {
        const auto st = model_st(1.0, 0.0, 3);
        busemann::CoRayOptions o;
        o.sample_budget = 3;
        o.t_points = 4;
        const auto rep = busemann::co_ray_check(slice_ray(st), 1.0, 0.0, o);
        CHECK_FALSE(rep.skipped);
        CHECK(rep.holds);
        CHECK(rep.checked == 12);
    }
    SUBCASE("flat product") {
        busemann::CoRayOptions o;
        o.sample_budget = 2;
        o.t_points = 3;
        const auto rep = busemann::co_ray_check(slice_ray(flat(3)), 0.0, 0.0, o);
        CHECK_FALSE(rep.skipped);
        CHECK(rep.holds);
    }
    SUBCASE("negative control: beta above the gate") {
        const auto rep = busemann::co_ray_check(slice_ray(model_st(0.0, 1.0, 3)), 0.0, 1.0);
        CHECK(rep.skipped);
        CHECK_FALSE(rep.holds);
        CHECK(rep.reason.find("precondition") == 0);
    }
    SUBCASE("negative control: ray shorter than b") {
        const auto st = model_st(1.0, 0.0, 3);
        auto ray = busemann::make_ray(st, Hypersurface::slice(0.2), Vector::Zero(2));
        const auto rep = busemann::co_ray_check(ray, 1.0, 0.0);
        CHECK(rep.skipped);
    }
}

TEST_CASE("truncation CSV") {
    const auto st = flat(2);
    const auto ray = slice_ray(st);
    const auto b = busemann::busemann(Point{0.1, Vector::Constant(1, 0.2)}, ray, busemann::default_schedule(ray));
    std::ostringstream os;
    busemann::write_truncations_csv(os, b);
    CHECK(os.str().rfind("r,truncation\n", 0) == 0);
    const std::string text = os.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(b.truncations.size() + 1));
}
