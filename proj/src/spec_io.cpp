#include "lorentz_compare/spec_io.hpp"

#include "lorentz_compare/errors.hpp"

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <set>
#include <sstream>

namespace lorentz_compare::spec {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

void reject_unknown(const nlohmann::json& obj, const std::set<std::string>& allowed, const char* where) {
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key)) throw ConfigError(std::string("unknown key '") + key + "' in " + where);
}

double number(const nlohmann::json& obj, const char* key, const char* where) {
    if (!obj.contains(key)) throw ConfigError(std::string("missing '") + key + "' in " + where);
    if (!obj[key].is_number()) throw ConfigError(std::string("'") + key + "' in " + where + " must be a number");
    return obj[key].get<double>();
}

double number_or(const nlohmann::json& obj, const char* key, double fallback, const char* where) {
    return obj.contains(key) ? number(obj, key, where) : fallback;
}

}  // namespace

double extended_real(const nlohmann::json& v, const char* what) {
    if (v.is_null()) return inf;
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "+inf") return inf;
        if (s == "-inf") return -inf;
    }
    throw ConfigError(std::string(what) + " must be a number, \"inf\" or \"-inf\"");
}

grw::Warp named_warp(const std::string& form, double A, double w, double c) {
    std::ostringstream label;
    label << A << "*" << form << "(" << w << "*t+" << c << ")";
    if (form == "cos")
        return {[=](double t) {
                    const double a = w * t + c;
                    return grw::WarpValues{A * std::cos(a), -A * w * std::sin(a), -A * w * w * std::cos(a)};
                },
                label.str()};
    if (form == "sin")
        return {[=](double t) {
                    const double a = w * t + c;
                    return grw::WarpValues{A * std::sin(a), A * w * std::cos(a), -A * w * w * std::sin(a)};
                },
                label.str()};
    if (form == "cosh")
        return {[=](double t) {
                    const double a = w * t + c;
                    return grw::WarpValues{A * std::cosh(a), A * w * std::sinh(a), A * w * w * std::cosh(a)};
                },
                label.str()};
    if (form == "sinh")
        return {[=](double t) {
                    const double a = w * t + c;
                    return grw::WarpValues{A * std::sinh(a), A * w * std::cosh(a), A * w * w * std::sinh(a)};
                },
                label.str()};
    if (form == "exp")
        return {[=](double t) {
                    const double e = A * std::exp(w * t + c);
                    return grw::WarpValues{e, w * e, w * w * e};
                },
                label.str()};
    throw ConfigError("unknown expression form '" + form + "' (expected cos, sin, sinh, cosh, exp, affine)");
}

grw::Warp affine_warp(double slope, double intercept) {
    std::ostringstream label;
    label << slope << "*t+" << intercept;
    return {[=](double t) { return grw::WarpValues{slope * t + intercept, slope, 0.0}; }, label.str()};
}

grw::Warp spline_warp(double t0, double h, const std::vector<double>& values) {
    if (values.size() < 5) throw ConfigError("spline warp needs at least 5 samples");
    if (!(h > 0.0)) throw ConfigError("spline spacing h must be positive");
    using Spline = boost::math::interpolators::cardinal_cubic_b_spline<double>;
    auto spline = std::make_shared<Spline>(values.begin(), values.end(), t0, h);
    std::ostringstream label;
    label << "spline(" << values.size() << " knots from " << t0 << ", h=" << h << ")";
    return {[spline](double t) { return grw::WarpValues{(*spline)(t), spline->prime(t), spline->double_prime(t)}; },
            label.str()};
}

SpacetimeSpec parse_spacetime(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("spacetime spec must be a JSON object");
    reject_unknown(doc, {"schema_version", "n", "fiber_curvature", "f", "t_min", "t_max"}, "spacetime spec");
    if (doc.contains("schema_version") && doc["schema_version"] != 1)
        throw ConfigError("unsupported spacetime spec schema_version (expected 1)");
    if (!doc.contains("n") || !doc["n"].is_number_integer()) throw ConfigError("spacetime spec needs an integer 'n'");
    const int n = doc["n"].get<int>();
    if (n < 2) throw ConfigError("spacetime dimension n must be >= 2");
    if (!doc.contains("f") || !doc["f"].is_object()) throw ConfigError("spacetime spec needs an object 'f'");
    const auto& f = doc["f"];
    if (!f.contains("kind") || !f["kind"].is_string()) throw ConfigError("'f' needs a string 'kind'");
    const std::string kind = f["kind"].get<std::string>();

    std::optional<model::ModelParams> table1;
    grw::Warp warp;
    int k = 0;
    double t_min = -inf, t_max = inf;
    if (kind == "table1") {
        reject_unknown(f, {"kind", "kappa", "beta"}, "'f'");
        model::ModelParams params{number(f, "kappa", "'f'"), number(f, "beta", "'f'"), n};
        model::WarpingProfile prof = [&] {
            try {
                return model::build_profile(params);
            } catch (const DomainError& e) {
                throw ConfigError(std::string("invalid table1 parameters: ") + e.what());
            }
        }();
        warp = grw::warp_from_profile(prof);
        k = prof.fiber_curvature();
        t_min = prof.lower_end();
        t_max = prof.upper_end();
        if (doc.contains("fiber_curvature") && doc["fiber_curvature"] != k)
            throw ConfigError("fiber_curvature disagrees with the table1 row");
        table1 = params;
    } else if (kind == "samples") {
        reject_unknown(f, {"kind", "t0", "h", "values"}, "'f'");
        if (!f.contains("values") || !f["values"].is_array()) throw ConfigError("'f' samples need a 'values' array");
        warp = spline_warp(number(f, "t0", "'f'"), number(f, "h", "'f'"), f["values"].get<std::vector<double>>());
    } else if (kind == "expression") {
        if (!f.contains("form") || !f["form"].is_string()) throw ConfigError("'f' expression needs a string 'form'");
        const std::string form = f["form"].get<std::string>();
        if (form == "affine") {
            reject_unknown(f, {"kind", "form", "slope", "intercept"}, "'f'");
            warp = affine_warp(number(f, "slope", "'f'"), number(f, "intercept", "'f'"));
        } else {
            reject_unknown(f, {"kind", "form", "amplitude", "rate", "phase"}, "'f'");
            warp = named_warp(form, number_or(f, "amplitude", 1.0, "'f'"), number_or(f, "rate", 1.0, "'f'"),
                              number_or(f, "phase", 0.0, "'f'"));
        }
    } else {
        throw ConfigError("unknown warp kind '" + kind + "' (expected table1, samples, expression)");
    }

    if (doc.contains("fiber_curvature")) {
        if (!doc["fiber_curvature"].is_number_integer()) throw ConfigError("fiber_curvature must be -1, 0 or 1");
        k = doc["fiber_curvature"].get<int>();
    } else if (!table1) {
        throw ConfigError("spacetime spec needs 'fiber_curvature'");
    }
    if (k < -1 || k > 1) throw ConfigError("fiber_curvature must be -1, 0 or 1");
    if (doc.contains("t_min")) t_min = extended_real(doc["t_min"], "t_min");
    if (doc.contains("t_max")) t_max = extended_real(doc["t_max"], "t_max");
    if (!(t_min < t_max)) throw ConfigError("t_min must be below t_max");
    if (table1) {
        const auto prof = model::build_profile(*table1);
        if (t_min < prof.lower_end() || t_max > prof.upper_end())
            throw ConfigError("time interval exceeds the table1 row's maximal interval");
    }
    return SpacetimeSpec{grw::Spacetime(n, k, std::move(warp), t_min, t_max), table1, doc};
}

SpacetimeSpec load_spacetime(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open spacetime spec '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("spacetime spec '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_spacetime(doc);
}

}  // namespace lorentz_compare::spec
