#pragma once

// Spacetime spec documents:
//   {"n": 3, "fiber_curvature": 0, "t_min": -1, "t_max": "inf",
//    "f": {"kind": "table1", "kappa": 1, "beta": 0}
//       | {"kind": "samples", "t0": 0, "h": 0.01, "values": [...]}
//       | {"kind": "expression", "form": "cos", "amplitude": 1, "rate": 1, "phase": 0}}
// Named forms: cos, sin, sinh, cosh, exp (amplitude * form(rate * t + phase)) and
// affine (slope * t + intercept). Infinite bounds are written "inf" / "-inf".

#include "lorentz_compare/grw_spacetime.hpp"
#include "lorentz_compare/model_catalog.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace lorentz_compare::spec {

grw::Warp named_warp(const std::string& form, double amplitude, double rate, double phase);
grw::Warp affine_warp(double slope, double intercept);

/// Cubic B-spline through uniformly spaced samples starting at t0 with spacing h.
grw::Warp spline_warp(double t0, double h, const std::vector<double>& values);

struct SpacetimeSpec {
    grw::Spacetime spacetime;
    std::optional<model::ModelParams> table1;  // set for "table1" warps
    nlohmann::json source;
};

/// Throws ConfigError on unknown keys, missing fields or inconsistent data.
SpacetimeSpec parse_spacetime(const nlohmann::json& doc);
SpacetimeSpec load_spacetime(const std::string& path);

/// "inf", "-inf", null or a number.
double extended_real(const nlohmann::json& v, const char* what);

}  // namespace lorentz_compare::spec
