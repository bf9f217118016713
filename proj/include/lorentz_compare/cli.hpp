#pragma once

// Command-line front end. Exit codes: 0 success, 1 a checked comparison property failed,
// 2 usage, configuration or numerical error.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace lorentz_compare::cli {

enum class Command { table, riccati, geodesic, tau, busemann, compare, split, counterexample };

struct OutputSpec {
    std::string format = "csv";  // csv | json
    std::string path;            // empty: stdout
};

struct RunConfig {
    Command command = Command::table;
    std::string spec_path;
    std::uint64_t seed = 1;
    std::map<std::string, double> tolerances;
    OutputSpec output;
    int jobs = 0;  // 0 leaves the OpenMP default
    bool dry_run = false;
};

inline constexpr int exit_ok = 0;
inline constexpr int exit_violation = 1;
inline constexpr int exit_usage = 2;

/// Parses argv (with an optional --config JSON file whose values the flags override),
/// runs the subcommand and writes results to `out` or the --output file.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace lorentz_compare::cli
