#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace lorentz_compare {

/// Input outside the domain of a closed-form expression or operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// An ODE integration stopped before reaching its target.
/// Carries the last accepted state so callers can report it.
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, double t, std::vector<double> state)
        : std::runtime_error(what), t_(t), state_(std::move(state)) {}

    double time() const noexcept { return t_; }
    const std::vector<double>& state() const noexcept { return state_; }

private:
    double t_;
    std::vector<double> state_;
};

/// Adaptive quadrature failed to reach its tolerance.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double lo, double hi, double error)
        : std::runtime_error(what), lo_(lo), hi_(hi), error_(error) {}

    /// Subinterval carrying the largest error estimate when the budget ran out.
    double lower() const noexcept { return lo_; }
    double upper() const noexcept { return hi_; }
    double error_estimate() const noexcept { return error_; }

private:
    double lo_, hi_, error_;
};

/// Malformed spacetime spec, profile document, or CLI configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace lorentz_compare
