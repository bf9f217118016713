#include "lorentz_compare/riccati_engine.hpp"

#include "lorentz_compare/errors.hpp"
#include "lorentz_compare/model_catalog.hpp"
#include "lorentz_compare/numerics/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace lorentz_compare::riccati {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

Matrix unpack(const numerics::State& y, int dim) {
    return Eigen::Map<const Matrix>(y.data(), dim, dim);
}

numerics::State pack(const Matrix& S) {
    return Eigen::Map<const numerics::State>(S.data(), S.size());
}

Matrix checked_curvature(const CurvatureField& R, int dim, double t) {
    Matrix r = R(t);
    if (r.rows() != dim || r.cols() != dim)
        throw DomainError("curvature operator has the wrong shape");
    const double asym = (r - r.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * (1.0 + r.cwiseAbs().maxCoeff())) {
        std::ostringstream msg;
        msg << "curvature operator is not symmetric at t = " << t << " (asymmetry " << asym << ")";
        throw DomainError(msg.str());
    }
    return r;
}

RiccatiState make_state(const CurvatureField& R, int dim, double t, const numerics::State& y) {
    RiccatiState s;
    s.dim = dim;
    s.t = t;
    s.S = unpack(y, dim);
    s.trace = s.S.trace();
    s.R = R(t);
    return s;
}

}  // namespace

RiccatiSolution integrate_matrix(const CurvatureField& R, int dim, const InitialValue& init,
                                 double horizon, const RiccatiOptions& options, Direction direction) {
    if (dim < 1) throw DomainError("Riccati dimension must be positive");
    if (init.S0.rows() != dim || init.S0.cols() != dim)
        throw DomainError("initial value has the wrong shape");
    const double dir = direction == Direction::forward ? 1.0 : -1.0;
    if (!((horizon - init.t0) * dir > 0.0))
        throw DomainError("horizon must lie beyond t0 in the integration direction");

    const numerics::Rhs rhs = [&](double t, const numerics::State& y, numerics::State& dy) {
        const Matrix S = unpack(y, dim);
        const Matrix dS = -(S * S) - checked_curvature(R, dim, t);
        dy = pack(dS);
    };

    numerics::OdeOptions ode;
    ode.rtol = options.rtol;
    ode.atol = options.atol;
    ode.max_step = options.max_step;

    RiccatiSolution sol;
    sol.blow_up_time = dir * inf;
    const numerics::State y0 = pack(init.S0);
    sol.samples.push_back(make_state(R, dim, init.t0, y0));

    double t_prev = init.t0;
    numerics::State y_prev = y0;
    bool crossed = false;
    const auto over = [&](double, const numerics::State& y) {
        return std::abs(unpack(y, dim).trace()) > options.blow_up_threshold;
    };
    const numerics::OdeOutcome out = numerics::integrate(
        rhs, init.t0, y0, horizon, ode, [&](double t, const numerics::State& y) {
            if (over(t, y)) {
                crossed = true;
                return false;
            }
            sol.samples.push_back(make_state(R, dim, t, y));
            t_prev = t;
            y_prev = y;
            return true;
        });

    if (!crossed && !out.ok()) {
        std::vector<double> last(out.y.data(), out.y.data() + out.y.size());
        std::ostringstream msg;
        msg << "Riccati integration failed at t = " << out.t << " before reaching the blow-up threshold";
        throw IntegrationError(msg.str(), out.t, std::move(last));
    }

    if (crossed) {
        const numerics::Bracket br =
            numerics::bisect_crossing(rhs, t_prev, y_prev, out.t, over, options.bisection_tol, ode);
        if (br.t_inside != t_prev) sol.samples.push_back(make_state(R, dim, br.t_inside, br.y_inside));
        // Final sample past the threshold, as close to the crossing as the integrator allows.
        const numerics::OdeOutcome tail = numerics::integrate(rhs, br.t_inside, br.y_inside, br.t_outside, ode);
        if (tail.status == numerics::OdeStatus::reached_end && over(br.t_outside, tail.y))
            sol.samples.push_back(make_state(R, dim, br.t_outside, tail.y));
        else
            sol.samples.push_back(make_state(R, dim, out.t, out.y));
        sol.blow_up_time = br.t_outside;
        sol.blow_up_sign = sol.samples.back().trace > 0.0 ? BlowUpSign::plus_infinity : BlowUpSign::minus_infinity;
    }

    if (direction == Direction::backward) std::reverse(sol.samples.begin(), sol.samples.end());
    return sol;
}

RiccatiSolution integrate_matrix(const CurvatureField& R, int dim, const AsymptoticStart& init,
                                 double horizon, const RiccatiOptions& options) {
    if (!(init.t_start > 0.0)) throw DomainError("asymptotic start requires t_start > 0");
    if (init.epsilon0 < 0.0) throw DomainError("asymptotic offset epsilon0 must be non-negative");
    InitialValue iv;
    iv.t0 = init.t_start;
    iv.S0 = (model::s_kappa(init.kappa, init.t_start) - init.epsilon0) * Matrix::Identity(dim, dim);
    return integrate_matrix(R, dim, iv, horizon, options, Direction::forward);
}

RiccatiSolution integrate_scalar(double kappa, double t0, double s0, Direction direction,
                                 double horizon, const RiccatiOptions& options) {
    InitialValue iv;
    iv.t0 = t0;
    iv.S0 = Matrix::Constant(1, 1, s0);
    return integrate_matrix([kappa](double) { return Matrix::Constant(1, 1, kappa); }, 1, iv, horizon,
                            options, direction);
}

namespace {
constexpr double pole_time_tol = 1e-9;
}

ComparisonVerdict comparison_verdict(const RiccatiSolution& solution, double kappa, double tol) {
    if (solution.samples.empty()) throw DomainError("comparison verdict needs a non-empty solution");
    ComparisonVerdict v;
    v.first_violation_time = std::numeric_limits<double>::quiet_NaN();
    v.min_margin = inf;
    const double horizon = model::s_kappa_horizon(kappa);
    std::vector<bool> isotropic;
    std::vector<double> scales;
    for (const auto& s : solution.samples) {
        double margin;
        double scale = 1.0;
        bool iso = false;
        if (s.t > 0.0 && s.t < horizon) {
            const double sk = model::s_kappa(kappa, s.t);
            margin = s.dim * sk - s.trace;
            // Near a pole the margin is dominated by where the pole sits; allow a time shift
            // of pole_time_tol there.
            const double slope = s.dim * std::abs(sk * sk + kappa);
            scale = std::max({1.0, std::abs(s.dim * sk), slope * pole_time_tol / tol});
            const Matrix id = Matrix::Identity(s.dim, s.dim);
            iso = (s.S - sk * id).norm() < tol * scale && (s.R - kappa * id).norm() < tol * std::max(1.0, std::abs(kappa));
        } else {
            // The comparison solution does not exist here; any surviving trajectory violates b <= b_kappa.
            margin = s.t > 0.0 ? -inf : std::numeric_limits<double>::quiet_NaN();
        }
        v.times.push_back(s.t);
        v.margin.push_back(margin);
        isotropic.push_back(iso);
        scales.push_back(scale);
        if (std::isnan(margin)) continue;
        v.min_margin = std::min(v.min_margin, margin / scale);
        if (margin < -tol * scale && v.holds) {
            v.holds = false;
            v.first_violation_time = s.t;
        }
        if (std::abs(margin) < tol * scale) v.equality_times.push_back(s.t);
    }
    if (!v.equality_times.empty()) {
        const double t_eq = v.equality_times.back();
        bool propagated = true;
        for (std::size_t i = 0; i < v.times.size(); ++i) {
            if (v.times[i] > t_eq || std::isnan(v.margin[i])) continue;
            if (std::abs(v.margin[i]) >= tol * scales[i] || !isotropic[i]) {
                propagated = false;
                break;
            }
        }
        v.rigidity_confirmed = propagated;
    }
    return v;
}

void write_csv(std::ostream& os, const RiccatiSolution& solution, double kappa) {
    const ComparisonVerdict v = comparison_verdict(solution, kappa);
    os << "t,trace,margin\n";
    os.precision(15);
    for (std::size_t i = 0; i < solution.samples.size(); ++i)
        os << solution.samples[i].t << ',' << solution.samples[i].trace << ',' << v.margin[i] << '\n';
}

Matrix random_psd(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Matrix G(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) G(i, j) = gauss(rng);
    const Matrix Q = Eigen::HouseholderQR<Matrix>(G).householderQ();
    Eigen::VectorXd u(dim);
    for (int i = 0; i < dim; ++i) u[i] = unit(rng);
    Matrix P = Q * u.asDiagonal() * Q.transpose();
    return 0.5 * (P + P.transpose());
}

}  // namespace lorentz_compare::riccati
