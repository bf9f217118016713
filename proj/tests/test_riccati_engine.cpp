#include "lorentz_compare/errors.hpp"
#include "lorentz_compare/model_catalog.hpp"
#include "lorentz_compare/riccati_engine.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace lorentz_compare;
using riccati::Matrix;

namespace {

riccati::CurvatureField constant(const Matrix& R) {
    return [R](double) { return R; };
}

}  // namespace

TEST_CASE("scalar closed forms") {
    SUBCASE("kappa = 0 from s(1) = 1") {
        const auto sol = riccati::integrate_scalar(0.0, 1.0, 1.0, riccati::Direction::forward, 2.0);
        CHECK(sol.samples.back().t == doctest::Approx(2.0));
        CHECK(sol.samples.back().trace == doctest::Approx(0.5).epsilon(1e-10));
        CHECK(sol.blow_up_sign == riccati::BlowUpSign::none);
        for (const auto& s : sol.samples) CHECK(std::abs(s.trace - 1.0 / s.t) < 1e-10);
    }
    SUBCASE("kappa = -1 fixed point") {
        const auto sol = riccati::integrate_scalar(-1.0, 0.0, 1.0, riccati::Direction::forward, 25.0);
        for (const auto& s : sol.samples) CHECK(std::abs(s.trace - 1.0) < 1e-13);
    }
    SUBCASE("kappa = 1 from s(pi/4) = 1 crosses zero at pi/2 and blows down at pi") {
        const auto sol = riccati::integrate_scalar(1.0, oracle::pi / 4, 1.0, riccati::Direction::forward, 4.0);
        CHECK(sol.blow_up_sign == riccati::BlowUpSign::minus_infinity);
        CHECK(sol.blow_up_time == doctest::Approx(oracle::pi).epsilon(1e-7));
        for (std::size_t i = 1; i < sol.samples.size(); ++i)
            if (sol.samples[i - 1].trace > 0 && sol.samples[i].trace <= 0) {
                CHECK(sol.samples[i - 1].t < oracle::pi / 2 + 1e-9);
                CHECK(sol.samples[i].t > oracle::pi / 2 - 0.05);
            }
        for (const auto& s : sol.samples)
            if (s.t < 3.0) CHECK(std::abs(s.trace - 1.0 / std::tan(s.t)) < 1e-8 * std::max(1.0, std::abs(s.trace)));
        CHECK(std::abs(sol.samples.back().trace) > 1e8);
    }
    SUBCASE("backward integration") {
        const auto sol = riccati::integrate_scalar(0.0, 2.0, 0.5, riccati::Direction::backward, 1.0);
        CHECK(sol.samples.front().t == doctest::Approx(1.0));
        CHECK(sol.samples.front().trace == doctest::Approx(1.0).epsilon(1e-10));
        for (std::size_t i = 1; i < sol.samples.size(); ++i) CHECK(sol.samples[i].t > sol.samples[i - 1].t);
    }
}

TEST_CASE("saturating matrix run reproduces s_kappa Id and the pole") {
    for (double kappa : {1.0, 0.0, -1.0, 2.5}) {
        const int dim = 3;
        const double horizon = kappa > 0 ? 1.2 * oracle::pi / std::sqrt(kappa) : 8.0;
        const auto sol = riccati::integrate_matrix(constant(kappa * Matrix::Identity(dim, dim)), dim,
                                                   riccati::AsymptoticStart{kappa, 0.0}, horizon);
        // Relative error, away from the blow-down pole where only its location is meaningful.
        const double pole = model::s_kappa_horizon(kappa);
        double worst = 0.0;
        for (const auto& s : sol.samples) {
            if (s.t > pole - 0.1) continue;
            const double sk = oracle::s_kappa(kappa, s.t);
            worst = std::max(worst, (s.S - sk * Matrix::Identity(dim, dim)).norm() / std::max(1.0, std::abs(sk)));
        }
        CHECK(worst < 1e-8);
        if (kappa > 0) {
            CHECK(sol.blow_up_sign == riccati::BlowUpSign::minus_infinity);
            CHECK(sol.blow_up_time == doctest::Approx(model::s_kappa_horizon(kappa)).epsilon(1e-6));
        }
        const auto v = riccati::comparison_verdict(sol, kappa);
        CHECK(v.holds);
        CHECK(v.rigidity_confirmed);
        CHECK(v.equality_times.size() == sol.samples.size());
    }
}

TEST_CASE("dim = 1 reduces to the scalar integrator") {
    const double kappa = 0.7;
    Matrix S0(1, 1);
    S0(0, 0) = 0.3;
    const auto m = riccati::integrate_matrix(constant(kappa * Matrix::Identity(1, 1)), 1, riccati::InitialValue{0.2, S0}, 6.0);
    const auto s = riccati::integrate_scalar(kappa, 0.2, 0.3, riccati::Direction::forward, 6.0);
    REQUIRE(m.samples.size() == s.samples.size());
    for (std::size_t i = 0; i < s.samples.size(); ++i) {
        CHECK(m.samples[i].t == s.samples[i].t);
        CHECK(m.samples[i].trace == s.samples[i].trace);
    }
    CHECK(m.blow_up_time == s.blow_up_time);
}

TEST_CASE("blow-down from S0 = beta/(n-1) Id at t = 0 happens at b") {
    for (const auto& p : {model::ModelParams{1.0, 0.0, 3}, {0.0, -1.0, 2}, {-1.0, -4.0, 3}, {2.0, 1.5, 4}, {0.0, -3.0, 4}}) {
        const int dim = p.n - 1;
        const double b = model::build_profile(p).upper_end();
        const Matrix S0 = p.beta / dim * Matrix::Identity(dim, dim);
        const auto sol = riccati::integrate_matrix(constant(p.kappa * Matrix::Identity(dim, dim)), dim,
                                                   riccati::InitialValue{0.0, S0}, 2.0 * b + 1.0);
        CHECK(sol.blow_up_sign == riccati::BlowUpSign::minus_infinity);
        CHECK(sol.blow_up_time == doctest::Approx(b).epsilon(1e-6));
    }
}

TEST_CASE("trace bound for R = kappa Id + PSD over 100 seeds") {
    double worst = oracle::inf;
    int runs = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(seed);
        const double kappa = std::vector<double>{-1.0, 0.0, 1.0}[seed % 3];
        const int dim = 2 + static_cast<int>(seed % 3);
        const Matrix P0 = riccati::random_psd(dim, rng);
        const Matrix P1 = riccati::random_psd(dim, rng);
        const riccati::CurvatureField R = [=](double t) -> Matrix {
            return kappa * Matrix::Identity(dim, dim) + (0.5 + 0.5 * std::sin(3 * t)) * P0 + t * t * P1;
        };
        const double horizon = kappa > 0 ? 1.1 * oracle::pi : 6.0;
        const auto sol = riccati::integrate_matrix(R, dim, riccati::AsymptoticStart{kappa, 0.0}, horizon);
        const auto v = riccati::comparison_verdict(sol, kappa);
        CHECK(v.holds);
        worst = std::min(worst, v.min_margin);
        if (kappa > 0) CHECK(sol.blow_up_time < oracle::pi);
        ++runs;
    }
    CHECK(runs == 100);
    CHECK(worst >= -1e-6);
}

TEST_CASE("comparison verdict on strict perturbation and on a fabricated violation") {
    const int dim = 2;
    // R = kappa Id + bump supported in (0.5, 1): after the bump the margin is strictly positive.
    const riccati::CurvatureField R = [](double t) -> Matrix {
        const double bump = (t > 0.5 && t < 1.0) ? std::pow(std::sin(2 * oracle::pi * (t - 0.5)), 2) : 0.0;
        return Matrix::Identity(2, 2) * (0.0 + bump);
    };
    const auto sol = riccati::integrate_matrix(R, dim, riccati::AsymptoticStart{0.0, 0.0}, 3.0);
    const auto v = riccati::comparison_verdict(sol, 0.0);
    CHECK(v.holds);
    CHECK_FALSE(v.rigidity_confirmed);
    for (std::size_t i = 0; i < v.times.size(); ++i)
        if (v.times[i] > 1.0) CHECK(v.margin[i] > 1e-3);

    riccati::RiccatiSolution fake;
    fake.blow_up_time = oracle::inf;
    for (double t = 0.5; t <= 2.0; t += 0.5) {
        riccati::RiccatiState s;
        s.dim = 1;
        s.t = t;
        s.S = Matrix::Constant(1, 1, 1.0 / t + (t > 1.2 ? 0.1 : 0.0));
        s.trace = s.S(0, 0);
        s.R = Matrix::Zero(1, 1);
        fake.samples.push_back(s);
    }
    const auto bad = riccati::comparison_verdict(fake, 0.0);
    CHECK_FALSE(bad.holds);
    CHECK(bad.first_violation_time == doctest::Approx(1.5));
    CHECK(bad.min_margin == doctest::Approx(-0.1));
}

TEST_CASE("comparison principle: a larger initial trace stays larger") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double kappa = 2 * u(rng) - 1;
        const double a = 2 * u(rng) - 1, d = 0.05 + u(rng);
        const auto lo = riccati::integrate_scalar(kappa, 0.0, a, riccati::Direction::forward, 3.0);
        const auto hi = riccati::integrate_scalar(kappa, 0.0, a + d, riccati::Direction::forward, 3.0);
        const double end = std::min({lo.blow_up_time, hi.blow_up_time, 3.0}) - 1e-3;
        for (double t = 0.1; t < end; t += 0.1) {
            auto interp = [&](const riccati::RiccatiSolution& s) {
                for (std::size_t i = 1; i < s.samples.size(); ++i)
                    if (s.samples[i].t >= t) {
                        const auto& A = s.samples[i - 1];
                        const auto& B = s.samples[i];
                        return A.trace + (B.trace - A.trace) * (t - A.t) / (B.t - A.t);
                    }
                return s.samples.back().trace;
            };
            CHECK(interp(hi) >= interp(lo));
        }
    }
}

TEST_CASE("symmetry is preserved and non-symmetric curvature is rejected") {
    std::mt19937_64 rng(4);
    const Matrix P = riccati::random_psd(4, rng);
    Matrix S0 = riccati::random_psd(4, rng);
    const auto sol = riccati::integrate_matrix(constant(P - 0.5 * Matrix::Identity(4, 4)), 4, riccati::InitialValue{0.0, S0}, 3.0);
    for (const auto& s : sol.samples) {
        CHECK((s.S - s.S.transpose()).norm() < 1e-10);
        CHECK(s.trace == doctest::Approx(s.S.trace()));
    }
    Matrix bad = Matrix::Identity(2, 2);
    bad(0, 1) = 1.0;
    CHECK_THROWS_AS(riccati::integrate_matrix(constant(bad), 2, riccati::InitialValue{0.0, Matrix::Zero(2, 2)}, 1.0),
                    DomainError);
}

TEST_CASE("random PSD generator") {
    std::mt19937_64 a(9), b(9);
    const Matrix P = riccati::random_psd(5, a);
    CHECK((P - riccati::random_psd(5, b)).norm() == 0.0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(P);
    CHECK(es.eigenvalues().minCoeff() >= -1e-14);
    CHECK(es.eigenvalues().maxCoeff() <= 1.0 + 1e-14);
}

TEST_CASE("CSV export") {
    const auto sol = riccati::integrate_scalar(0.0, 1.0, 1.0, riccati::Direction::forward, 1.2);
    std::ostringstream os;
    riccati::write_csv(os, sol, 0.0);
    const std::string text = os.str();
    CHECK(text.rfind("t,trace,margin\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(sol.samples.size() + 1));
}
