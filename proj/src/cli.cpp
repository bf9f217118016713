#include "lorentz_compare/cli.hpp"

#include "lorentz_compare/busemann_engine.hpp"
#include "lorentz_compare/comparison_suite.hpp"
#include "lorentz_compare/errors.hpp"
#include "lorentz_compare/lorentz_distance.hpp"
#include "lorentz_compare/model_catalog.hpp"
#include "lorentz_compare/riccati_engine.hpp"
#include "lorentz_compare/spec_io.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <omp.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>

namespace lorentz_compare::cli {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

const std::map<std::string, Command> command_names{
    {"table", Command::table},       {"riccati", Command::riccati}, {"geodesic", Command::geodesic},
    {"tau", Command::tau},           {"busemann", Command::busemann}, {"compare", Command::compare},
    {"split", Command::split},       {"counterexample", Command::counterexample}};

const std::map<Command, std::set<std::string>> tolerance_keys{
    {Command::table, {}},
    {Command::riccati, {"verdict"}},
    {Command::geodesic, {}},
    {Command::tau, {}},
    {Command::busemann, {"monotone", "property"}},
    {Command::compare, {"monotone", "flat", "cut_band"}},
    {Command::split, {"isotropy", "reconstruction"}},
    {Command::counterexample, {}}};

// Values for every subcommand flag; unset ones keep these defaults.
struct Flags {
    std::optional<double> kappa, beta;
    int n = 3;
    int dim = 3;
    double psd_scale = 0.0;
    double epsilon0 = 0.0;
    std::optional<double> t_end;
    std::string p, q, v, x, foot;
    double span = 1.0;
    std::optional<double> sigma_t0;
    bool asymptote = false;
    std::optional<double> support_level;
    double radius = 1.0;
    std::size_t resolution = 32;
    std::size_t t_count = 128;
    double horizon = 10.0;
    std::size_t samples = 4;
    std::string beta_tilde;
    double t_compare = 2.0;
    std::vector<std::string> tol;
};

std::string fmt(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) v = 0.0;  // drop the sign of -0
    std::ostringstream os;
    os.precision(15);
    os << v;
    std::string s = os.str();
    if (s.find_first_of(".en") == std::string::npos) s += ".0";
    return s;
}

nlohmann::json jnum(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(fmt(v)); }

std::vector<double> parse_list(const std::string& s, const char* what) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError(std::string("cannot parse ") + what + " '" + s + "' as comma-separated numbers");
        }
    }
    return out;
}

grw::Point parse_point(const std::string& s, int fiber_dim, const char* what) {
    const auto v = parse_list(s, what);
    if (static_cast<int>(v.size()) != fiber_dim + 1)
        throw UsageError(std::string(what) + " needs t and " + std::to_string(fiber_dim) + " fiber coordinates");
    return {v[0], Eigen::Map<const Eigen::VectorXd>(v.data() + 1, fiber_dim)};
}

grw::Vector parse_fiber(const std::string& s, int fiber_dim, const char* what) {
    if (s.empty()) return grw::Vector::Zero(fiber_dim);
    const auto v = parse_list(s, what);
    if (static_cast<int>(v.size()) != fiber_dim)
        throw UsageError(std::string(what) + " needs " + std::to_string(fiber_dim) + " fiber coordinates");
    return Eigen::Map<const Eigen::VectorXd>(v.data(), fiber_dim);
}

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
    for (const auto& a : args)
        if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    return false;
}

std::string scalar_text(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return fmt(v.get<double>());
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    throw UsageError("config values must be strings, numbers or booleans");
}

// Config-file values become flags unless the command line already sets them.
std::vector<std::string> merge_config(std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty()) return args;
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config '" + path + "'");
    nlohmann::json cfg;
    try {
        in >> cfg;
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("config '" + path + "' is not valid JSON: " + e.what());
    }
    if (!cfg.is_object()) throw UsageError("config must be a JSON object");
    static const std::set<std::string> top{"schema_version", "command", "spec", "seed", "tolerances",
                                           "output",         "jobs",    "args"};
    for (const auto& [k, _] : cfg.items())
        if (!top.count(k)) throw UsageError("unknown config key '" + k + "'");
    if (!cfg.contains("schema_version") || cfg["schema_version"] != 1)
        throw UsageError("config needs schema_version 1");

    bool has_command = false;
    for (const auto& a : args)
        if (command_names.count(a)) has_command = true;
    std::vector<std::string> extra;
    const auto add = [&](const std::string& flag, const std::string& value) {
        if (!has_flag(args, flag)) {
            extra.push_back(flag);
            extra.push_back(value);
        }
    };
    if (cfg.contains("spec")) add("--spec", scalar_text(cfg["spec"]));
    if (cfg.contains("seed")) add("--seed", scalar_text(cfg["seed"]));
    if (cfg.contains("jobs")) add("--jobs", scalar_text(cfg["jobs"]));
    if (cfg.contains("output")) {
        const auto& o = cfg["output"];
        if (!o.is_object()) throw UsageError("config 'output' must be an object");
        for (const auto& [k, v] : o.items()) {
            if (k == "format") add("--format", scalar_text(v));
            else if (k == "path") add("--output", scalar_text(v));
            else throw UsageError("unknown config key 'output." + k + "'");
        }
    }
    if (cfg.contains("tolerances")) {
        if (!cfg["tolerances"].is_object()) throw UsageError("config 'tolerances' must be an object");
        for (const auto& [k, v] : cfg["tolerances"].items()) {
            bool set = false;
            for (const auto& a : args)
                if (a.rfind(k + "=", 0) == 0) set = true;
            if (!set) {
                extra.push_back("--tol");
                extra.push_back(k + "=" + scalar_text(v));
            }
        }
    }
    if (cfg.contains("args")) {
        if (!cfg["args"].is_object()) throw UsageError("config 'args' must be an object");
        for (const auto& [k, v] : cfg["args"].items()) {
            const std::string flag = "--" + k;
            if (v.is_boolean()) {
                if (v.get<bool>() && !has_flag(args, flag)) extra.push_back(flag);
            } else {
                add(flag, scalar_text(v));
            }
        }
    }
    if (!has_command) {
        if (!cfg.contains("command")) throw UsageError("no subcommand given");
        const std::string c = scalar_text(cfg["command"]);
        if (!command_names.count(c)) throw UsageError("unknown command '" + c + "' in config");
        args.insert(args.begin(), c);
    }
    // Subcommand flags must follow the subcommand name.
    args.insert(args.end(), extra.begin(), extra.end());
    return args;
}

class Emitter {
public:
    Emitter(const OutputSpec& spec, std::ostream& fallback) : format_(spec.format) {
        if (!spec.path.empty()) {
            file_.open(spec.path);
            if (!file_) throw UsageError("cannot open output '" + spec.path + "'");
        }
        os_ = spec.path.empty() ? &fallback : &file_;
        os_->precision(15);
    }
    bool json() const { return format_ == "json"; }
    std::ostream& os() { return *os_; }
    void put(const nlohmann::json& j) { *os_ << j.dump(2) << '\n'; }

private:
    std::string format_;
    std::ofstream file_;
    std::ostream* os_ = nullptr;
};

double tol_or(const RunConfig& cfg, const std::string& key, double fallback) {
    const auto it = cfg.tolerances.find(key);
    return it == cfg.tolerances.end() ? fallback : it->second;
}

spec::SpacetimeSpec require_spec(const RunConfig& cfg) {
    if (cfg.spec_path.empty()) throw UsageError("--spec is required");
    return spec::load_spacetime(cfg.spec_path);
}

model::ModelParams model_params(const Flags& fl, const std::optional<spec::SpacetimeSpec>& sp, int n) {
    if (fl.kappa && fl.beta) return {*fl.kappa, *fl.beta, n};
    if (sp && sp->table1) return *sp->table1;
    throw UsageError("pass --kappa and --beta (or a spec with a table1 warp)");
}

// ---------------------------------------------------------------- subcommands

int cmd_table(const RunConfig& cfg, const Flags& fl, Emitter& em, std::ostream&) {
    std::vector<model::ModelParams> rows;
    if (fl.kappa || fl.beta) {
        if (!fl.kappa || !fl.beta) throw UsageError("table needs both --kappa and --beta");
        rows.push_back({*fl.kappa, *fl.beta, fl.n});
    } else {
        const double e = fl.n - 1;
        for (const auto& [k, b] : std::vector<std::pair<double, double>>{
                 {-1, 0}, {-1, -e}, {-1, 2 * e}, {-1, -2 * e}, {0, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {1, 0}})
            rows.push_back({k, b, fl.n});
    }
    std::vector<model::WarpingProfile> profiles;
    for (const auto& r : rows) profiles.push_back(model::build_profile(r));
    if (cfg.dry_run) return exit_ok;
    if (em.json()) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& p : profiles) {
            auto j = model::to_json(p);
            j["v_bar"] = jnum(model::volume_profile(p).v_bar());
            j["H0"] = p.H(0.0);
            arr.push_back(j);
        }
        em.put(arr);
    } else {
        em.os() << "kappa,beta,n,regime,c,fiber_curvature,a,b,v_bar,H0\n";
        for (const auto& p : profiles) {
            const auto& P = p.params();
            em.os() << fmt(P.kappa) << ',' << fmt(P.beta) << ',' << P.n << ",\"" << model::regime_tag(p.regime()) << "\","
                    << fmt(p.c()) << ',' << p.fiber_curvature() << ',' << fmt(p.lower_end()) << ','
                    << fmt(p.upper_end()) << ',' << fmt(model::volume_profile(p).v_bar()) << ',' << fmt(p.H(0.0))
                    << '\n';
        }
    }
    return exit_ok;
}

int cmd_riccati(const RunConfig& cfg, const Flags& fl, Emitter& em, std::ostream& err) {
    const double kappa = fl.kappa.value_or(0.0);
    if (fl.dim < 1) throw UsageError("--dim must be positive");
    if (fl.psd_scale < 0.0) throw UsageError("--psd-scale must be non-negative");
    const double horizon = fl.t_end.value_or(kappa > 0.0 ? 1.5 * std::numbers::pi / std::sqrt(kappa) : 10.0);
    if (cfg.dry_run) return exit_ok;
    std::mt19937_64 rng(cfg.seed);
    const riccati::Matrix P =
        fl.psd_scale > 0.0 ? riccati::Matrix(fl.psd_scale * riccati::random_psd(fl.dim, rng))
                           : riccati::Matrix::Zero(fl.dim, fl.dim);
    const riccati::Matrix R = kappa * riccati::Matrix::Identity(fl.dim, fl.dim) + P;
    const auto sol = riccati::integrate_matrix([R](double) { return R; }, fl.dim,
                                               riccati::AsymptoticStart{kappa, fl.epsilon0}, horizon);
    const auto verdict = riccati::comparison_verdict(sol, kappa, tol_or(cfg, "verdict", 1e-6));
    if (em.json()) {
        em.put({{"kappa", kappa},
                {"dim", fl.dim},
                {"blow_up_time", jnum(sol.blow_up_time)},
                {"holds", verdict.holds},
                {"min_margin", jnum(verdict.min_margin)},
                {"rigidity_confirmed", verdict.rigidity_confirmed},
                {"equality_times", verdict.equality_times.size()}});
    } else {
        riccati::write_csv(em.os(), sol, kappa);
    }
    if (!verdict.holds) {
        err << "violation: tr S > dim s_kappa first at t = " << fmt(verdict.first_violation_time)
            << " (min margin " << fmt(verdict.min_margin) << ")\n";
        return exit_violation;
    }
    return exit_ok;
}

int cmd_geodesic(const RunConfig& cfg, const Flags& fl, Emitter& em, std::ostream&) {
    const auto sp = require_spec(cfg);
    const auto& st = sp.spacetime;
    const int m = st.fiber_dim();
    if (fl.p.empty() || fl.v.empty()) throw UsageError("geodesic needs --p and --v");
    const auto p = parse_point(fl.p, m, "--p");
    const auto vv = parse_list(fl.v, "--v");
    if (static_cast<int>(vv.size()) != m + 1) throw UsageError("--v needs dt and the fiber components");
    if (!(fl.span > 0.0)) throw UsageError("--span must be positive");
    if (cfg.dry_run) return exit_ok;
    const auto v = grw::make_tangent(st, p, vv[0], Eigen::Map<const Eigen::VectorXd>(vv.data() + 1, m));
    const auto tr = grw::geodesic(st, p, v, fl.span);
    if (em.json()) {
        nlohmann::json s = nlohmann::json::array();
        for (const auto& smp : tr.samples) {
            nlohmann::json row{{"s", smp.s}, {"t", smp.point.t}, {"dt", smp.tangent.dt}};
            row["x"] = std::vector<double>(smp.point.x.data(), smp.point.x.data() + m);
            row["dx"] = std::vector<double>(smp.tangent.dx.data(), smp.tangent.dx.data() + m);
            s.push_back(row);
        }
        em.put({{"samples", s},
                {"energy", tr.energy},
                {"angular_momentum", tr.angular_momentum},
                {"length", tr.length},
                {"param_end", tr.param_end},
                {"truncated", tr.truncated}});
    } else {
        em.os() << "s,t";
        for (int i = 0; i < m; ++i) em.os() << ",x" << i + 1;
        em.os() << ",dt";
        for (int i = 0; i < m; ++i) em.os() << ",dx" << i + 1;
        em.os() << '\n';
        for (const auto& smp : tr.samples) {
            em.os() << smp.s << ',' << smp.point.t;
            for (int i = 0; i < m; ++i) em.os() << ',' << smp.point.x[i];
            em.os() << ',' << smp.tangent.dt;
            for (int i = 0; i < m; ++i) em.os() << ',' << smp.tangent.dx[i];
            em.os() << '\n';
        }
    }
    return exit_ok;
}

int cmd_tau(const RunConfig& cfg, const Flags& fl, Emitter& em, std::ostream&) {
    const auto sp = require_spec(cfg);
    const auto& st = sp.spacetime;
    const int m = st.fiber_dim();
    if (fl.q.empty()) throw UsageError("tau needs --q");
    if (fl.p.empty() == !fl.sigma_t0) throw UsageError("tau needs exactly one of --p or --sigma-t0");
    const auto q = parse_point(fl.q, m, "--q");
    std::optional<grw::Point> p;
    if (!fl.p.empty()) p = parse_point(fl.p, m, "--p");
    if (cfg.dry_run) return exit_ok;
    const auto r = p ? distance::tau_point(st, *p, q)
                     : distance::tau_sigma(st, grw::Hypersurface::slice(*fl.sigma_t0), q);
    if (em.json()) {
        em.put(distance::to_json(r));
    } else {
        em.os() << "value,deficit,causal,converged\n"
                << fmt(r.value) << ',' << fmt(r.deficit) << ',' << r.causal << ',' << r.diagnostics.converged << '\n';
    }
    return exit_ok;
}

int cmd_busemann(const RunConfig& cfg, const Flags& fl, Emitter& em, std::ostream& err) {
    const auto sp = require_spec(cfg);
    const auto& st = sp.spacetime;
    const int m = st.fiber_dim();
    if (fl.x.empty()) throw UsageError("busemann needs --x");
    const auto x = parse_point(fl.x, m, "--x");
    const auto foot = parse_fiber(fl.foot, m, "--foot");
    const auto sigma = grw::Hypersurface::slice(fl.sigma_t0.value_or(0.0));
    if (cfg.dry_run) return exit_ok;
    const auto ray = busemann::make_ray(st, sigma, foot);
    const auto schedule = busemann::default_schedule(ray);
    busemann::BusemannOptions bo;
    bo.monotone_tol = tol_or(cfg, "monotone", 1e-8);
    const auto b = busemann::busemann(x, ray, schedule, bo);
    int code = exit_ok;
    if (!b.monotone) {
        err << "violation: truncations increase along the schedule at x = (" << fmt(x.t) << ", ...)\n";
        code = exit_violation;
    }
    nlohmann::json j{{"value", b.value},
                     {"extrapolated", b.extrapolated},
                     {"tail_bound", jnum(b.tail_bound)},
                     {"monotone", b.monotone},
                     {"ray_length", jnum(ray.a)}};
    nlohmann::json tr = nlohmann::json::array();
    for (const auto& t : b.truncations) tr.push_back({t.r, t.value});
    j["truncations"] = tr;
    if (fl.asymptote) {
        busemann::AsymptoteOptions ao;
        ao.property_tol = tol_or(cfg, "property", 2e-4);
        const auto as = busemann::asymptote(x, ray, schedule, ao);
        j["asymptote"] = {{"cauchy_gap", as.cauchy_gap},
                          {"converged", as.converged},
                          {"check_times", as.check_times},
                          {"check_errors", as.check_errors},
                          {"property_holds", as.property_holds}};
        if (as.converged && !as.property_holds) {
            err << "violation: b(alpha(t)) - t - b(p) exceeds tolerance; errors";
            for (const double e : as.check_errors) err << ' ' << fmt(e);
            err << '\n';
            code = exit_violation;
        }
    }
    if (fl.support_level) {
        const double kappa = model_params(fl, sp, st.n()).kappa;
        busemann::SupportOptions so;
        so.seed = cfg.seed;
        const auto rep = busemann::support_bound_check(ray, *fl.support_level, kappa, schedule, so);
        j["support"] = {{"worst_margin", jnum(rep.worst_margin)},
                        {"worst_level_margin", jnum(rep.worst_level_margin)},
                        {"excluded", rep.excluded},
                        {"holds", rep.holds}};
        if (!rep.holds && !rep.samples.empty()) {
            err << "violation: past-sphere mean curvature below the bound; worst margin " << fmt(rep.worst_margin)
                << ", level margin " << fmt(rep.worst_level_margin) << '\n';
            code = exit_violation;
        }
    }
    if (em.json()) em.put(j);
    else busemann::write_truncations_csv(em.os(), b);
    return code;
}

int cmd_compare(const RunConfig& cfg, const Flags& fl, Emitter& em, std::ostream& err) {
    const auto sp = require_spec(cfg);
    const auto& st = sp.spacetime;
    const auto params = model_params(fl, sp, st.n());
    if (params.n != st.n()) throw UsageError("model dimension differs from the spacetime");
    const auto profile = model::build_profile(params);
    const auto sigma = grw::Hypersurface::slice(fl.sigma_t0.value_or(0.0));
    const auto region = comparison::RegionSpec::ball(sigma, grw::Vector::Zero(st.fiber_dim()), fl.radius, fl.resolution);
    auto grid = comparison::default_t_grid(profile, fl.t_count, fl.horizon);
    // Keep the grid inside the spacetime's own interval.
    const double room = st.t_max() - sigma.slice_time();
    while (!grid.empty() && grid.back() >= room * (1.0 - 1e-9)) grid.pop_back();
    if (grid.empty()) throw UsageError("time grid is empty inside the spacetime interval");
    if (cfg.dry_run) return exit_ok;
    comparison::ReportOptions ro;
    ro.monotone_tol = tol_or(cfg, "monotone", 1e-8);
    ro.flat_tol = tol_or(cfg, "flat", 1e-8);
    ro.area.cut_band = tol_or(cfg, "cut_band", 1e-4);
    ro.ccc.seed = cfg.seed;
    const auto rep = comparison::monotonicity_report(st, region, profile, grid, ro);
    if (em.json()) em.put(comparison::to_json(rep));
    else comparison::write_csv(em.os(), rep);
    if (rep.ccc_holds && !rep.monotone) {
        for (std::size_t k = 1; k < rep.t.size(); ++k)
            if (rep.area_ratio[k] > rep.area_ratio[k - 1] * (1.0 + ro.monotone_tol) ||
                rep.vol_ratio[k] > rep.vol_ratio[k - 1] * (1.0 + ro.monotone_tol)) {
                err << "violation: ratio increases at t = " << fmt(rep.t[k]) << " (area ratio "
                    << fmt(rep.area_ratio[k - 1]) << " -> " << fmt(rep.area_ratio[k]) << ", volume ratio "
                    << fmt(rep.vol_ratio[k - 1]) << " -> " << fmt(rep.vol_ratio[k]) << ")\n";
                break;
            }
        return exit_violation;
    }
    if (!rep.ccc_holds) err << "note: CCC(" << fmt(params.kappa) << ", " << fmt(params.beta)
                            << ") fails on samples; monotonicity is reported but not required\n";
    return exit_ok;
}

int cmd_split(const RunConfig& cfg, const Flags& fl, Emitter& em, std::ostream& err) {
    const auto sp = require_spec(cfg);
    const auto& st = sp.spacetime;
    const auto params = model_params(fl, sp, st.n());
    const auto profile = model::build_profile(params);
    const int m = st.fiber_dim();
    if (fl.samples < 1) throw UsageError("--samples must be positive");
    const double room = st.t_max() - fl.sigma_t0.value_or(0.0);
    auto grid = comparison::default_t_grid(profile, fl.t_count, fl.horizon);
    while (!grid.empty() && grid.back() >= room * (1.0 - 1e-9)) grid.pop_back();
    if (grid.empty()) throw UsageError("time grid is empty inside the spacetime interval");
    if (cfg.dry_run) return exit_ok;
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> g(0.0, 0.5);
    std::vector<grw::Vector> xs{grw::Vector::Zero(m)};
    while (xs.size() < fl.samples) {
        grw::Vector x(m);
        for (int i = 0; i < m; ++i) x[i] = g(rng);
        xs.push_back(x);
    }
    comparison::SplittingOptions so;
    so.isotropy_tol = tol_or(cfg, "isotropy", 1e-6);
    so.pass_tol = tol_or(cfg, "reconstruction", 1e-6);
    const auto rep = comparison::splitting_reconstruct(st, grw::Hypersurface::slice(fl.sigma_t0.value_or(0.0)),
                                                       profile, grid, xs, so);
    if (em.json()) {
        em.put(comparison::to_json(rep));
    } else {
        em.os() << "precondition_ok,worst_anisotropy,worst_t,max_error,passed,samples\n"
                << rep.precondition_ok << ',' << fmt(rep.worst_anisotropy) << ',' << fmt(rep.worst_t) << ','
                << fmt(rep.max_error) << ',' << rep.passed << ',' << rep.samples << '\n';
    }
    if (!rep.passed) {
        err << "violation: " << (rep.precondition_ok ? "reconstruction error " + fmt(rep.max_error)
                                                     : "shape operator not isotropic, defect " +
                                                           fmt(rep.worst_anisotropy) + " at t = " + fmt(rep.worst_t))
            << '\n';
        return exit_violation;
    }
    return exit_ok;
}

int cmd_counterexample(const RunConfig& cfg, const Flags& fl, Emitter& em, std::ostream& err) {
    if (!fl.kappa || !fl.beta) throw UsageError("counterexample needs --kappa and --beta");
    const auto bt = parse_list(fl.beta_tilde, "--beta-tilde");
    if (bt.size() != 2) throw UsageError("--beta-tilde needs two values");
    if (cfg.dry_run) return exit_ok;
    const auto rep = comparison::nonrigid_example(*fl.kappa, *fl.beta, bt[0], bt[1], fl.n, fl.t_compare);
    if (em.json()) {
        em.put(comparison::to_json(rep));
    } else {
        em.os() << "beta_tilde,ccc,cut_infinite,v\n"
                << fmt(rep.beta_tilde1) << ',' << rep.ccc1 << ',' << rep.cut_infinite1 << ',' << fmt(rep.v1) << '\n'
                << fmt(rep.beta_tilde2) << ',' << rep.ccc2 << ',' << rep.cut_infinite2 << ',' << fmt(rep.v2) << '\n';
    }
    if (!rep.demonstrates) {
        err << "not demonstrated: relative volume gap " << fmt(rep.relative_gap) << " at t = " << fmt(rep.t_compare)
            << '\n';
        return exit_violation;
    }
    return exit_ok;
}

const char* csv_help(Command c) {
    switch (c) {
        case Command::table: return "CSV columns: kappa,beta,n,regime,c,fiber_curvature,a,b,v_bar,H0";
        case Command::riccati: return "CSV columns: t,trace,margin";
        case Command::geodesic: return "CSV columns: s,t,x1..xm,dt,dx1..dxm";
        case Command::tau: return "CSV columns: value,deficit,causal,converged";
        case Command::busemann: return "CSV columns: r,truncation";
        case Command::compare: return "CSV columns: t,area_ratio,vol_ratio,rigidity_flag";
        case Command::split: return "CSV columns: precondition_ok,worst_anisotropy,worst_t,max_error,passed,samples";
        case Command::counterexample: return "CSV columns: beta_tilde,ccc,cut_infinite,v";
    }
    return "";
}

}  // namespace

int run(const std::vector<std::string>& raw, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    Flags fl;
    CLI::App app{"Lorentzian comparison geometry on warped-product spacetimes"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Help for every subcommand");
    std::string config_path;
    std::optional<std::uint64_t> seed;
    app.add_option("--config", config_path, "JSON config (schema_version 1); flags override its values");

    std::map<Command, CLI::App*> subs;
    for (const auto& [name, cmd] : command_names) {
        CLI::App* s = app.add_subcommand(name);
        s->footer(csv_help(cmd));
        s->add_option("--spec", cfg.spec_path, "Spacetime spec JSON");
        s->add_option("--seed", seed, "RNG seed (falls back to LORENTZ_COMPARE_SEED, then 1)");
        s->add_option("--format", cfg.output.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        s->add_option("--output", cfg.output.path, "Output file (default stdout)");
        s->add_option("--jobs", cfg.jobs, "Worker threads (0: OpenMP default)")->check(CLI::NonNegativeNumber);
        s->add_option("--tol", fl.tol, "Tolerance override key=value (repeatable)");
        s->add_flag("--dry-run", cfg.dry_run, "Validate the configuration without computing");
        s->add_option("--config", config_path, "JSON config (schema_version 1)");
        subs[cmd] = s;
    }
    for (auto* s : {subs[Command::table], subs[Command::riccati], subs[Command::compare], subs[Command::split],
                    subs[Command::counterexample], subs[Command::busemann]}) {
        s->add_option("--kappa", fl.kappa, "Ricci bound constant");
        s->add_option("--beta", fl.beta, "Mean-curvature bound");
    }
    for (auto* s : {subs[Command::table], subs[Command::counterexample]})
        s->add_option("--n", fl.n, "Spacetime dimension")->capture_default_str();
    subs[Command::riccati]->add_option("--dim", fl.dim, "Matrix dimension")->capture_default_str();
    subs[Command::riccati]->add_option("--psd-scale", fl.psd_scale, "R = kappa Id + scale * random PSD")->capture_default_str();
    subs[Command::riccati]->add_option("--epsilon0", fl.epsilon0, "Initial offset below s_kappa")->capture_default_str();
    subs[Command::riccati]->add_option("--t-end", fl.t_end, "Integration horizon");
    subs[Command::geodesic]->add_option("--p", fl.p, "Start point t,x1,..,xm");
    subs[Command::geodesic]->add_option("--v", fl.v, "Initial velocity dt,dx1,..,dxm");
    subs[Command::geodesic]->add_option("--span", fl.span, "Affine parameter span")->capture_default_str();
    subs[Command::tau]->add_option("--p", fl.p, "Past point t,x1,..,xm");
    subs[Command::tau]->add_option("--q", fl.q, "Future point t,x1,..,xm");
    for (auto* s : {subs[Command::tau], subs[Command::busemann], subs[Command::compare], subs[Command::split]})
        s->add_option("--sigma-t0", fl.sigma_t0, "Slice Sigma = {t = t0}");
    subs[Command::busemann]->add_option("--x", fl.x, "Point t,x1,..,xm");
    subs[Command::busemann]->add_option("--foot", fl.foot, "Fiber point of the ray on Sigma");
    subs[Command::busemann]->add_flag("--asymptote", fl.asymptote, "Also build the asymptote from x");
    subs[Command::busemann]->add_option("--support-level", fl.support_level, "Run the support bound check at this level");
    subs[Command::compare]->add_option("--radius", fl.radius, "Fiber ball radius")->capture_default_str();
    for (auto* s : {subs[Command::compare], subs[Command::split]}) {
        s->add_option("--t-count", fl.t_count, "Number of grid times")->capture_default_str();
        s->add_option("--horizon", fl.horizon, "Grid end when b is infinite")->capture_default_str();
    }
    subs[Command::compare]->add_option("--resolution", fl.resolution, "Quadrature nodes per axis")->capture_default_str();
    subs[Command::split]->add_option("--samples", fl.samples, "Fiber sample points")->capture_default_str();
    subs[Command::counterexample]->add_option("--beta-tilde", fl.beta_tilde, "Two values b1,b2");
    subs[Command::counterexample]->add_option("--t", fl.t_compare, "Comparison time")->capture_default_str();

    std::vector<std::string> args;
    try {
        args = merge_config(raw);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }
    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return exit_usage;
    }

    Command cmd = Command::table;
    for (const auto& [c, s] : subs)
        if (s->parsed()) cmd = c;
    cfg.command = cmd;
    if (seed) {
        cfg.seed = *seed;
    } else if (const char* env = std::getenv("LORENTZ_COMPARE_SEED")) {
        try {
            cfg.seed = std::stoull(env);
        } catch (const std::exception&) {
            err << "error: LORENTZ_COMPARE_SEED is not an integer\n";
            return exit_usage;
        }
    }

    try {
        for (const auto& kv : fl.tol) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw UsageError("--tol expects key=value, got '" + kv + "'");
            const std::string key = kv.substr(0, eq);
            if (!tolerance_keys.at(cmd).count(key)) throw UsageError("unknown tolerance key '" + key + "'");
            const auto v = parse_list(kv.substr(eq + 1), "--tol value");
            if (v.size() != 1 || !(v[0] > 0.0)) throw UsageError("tolerance '" + key + "' must be one positive number");
            cfg.tolerances[key] = v[0];
        }
        if (cfg.jobs > 0) omp_set_num_threads(cfg.jobs);
        Emitter em(cfg.output, out);
        int code = exit_ok;
        switch (cmd) {
            case Command::table: code = cmd_table(cfg, fl, em, err); break;
            case Command::riccati: code = cmd_riccati(cfg, fl, em, err); break;
            case Command::geodesic: code = cmd_geodesic(cfg, fl, em, err); break;
            case Command::tau: code = cmd_tau(cfg, fl, em, err); break;
            case Command::busemann: code = cmd_busemann(cfg, fl, em, err); break;
            case Command::compare: code = cmd_compare(cfg, fl, em, err); break;
            case Command::split: code = cmd_split(cfg, fl, em, err); break;
            case Command::counterexample: code = cmd_counterexample(cfg, fl, em, err); break;
        }
        if (cfg.dry_run) out << "dry-run ok\n";
        return code;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
    } catch (const DomainError& e) {
        err << "domain error: " << e.what() << '\n';
    } catch (const IntegrationError& e) {
        err << "integration error: " << e.what() << '\n';
    } catch (const QuadratureError& e) {
        err << "quadrature error: " << e.what() << '\n';
    }
    return exit_usage;
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, std::cout, std::cerr);
}

}  // namespace lorentz_compare::cli
