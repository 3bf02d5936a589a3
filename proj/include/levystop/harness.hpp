#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "levystop/config.hpp"

namespace levystop {

/// Everything a run writes, as in-memory text. Files are produced from these
/// strings verbatim, so equal outcomes give byte-identical artifacts.
struct RunOutcome {
    std::string effective_config;
    std::string surface_csv;     // x,t,u,g,region
    std::string boundary_csv;    // t,b
    std::string comparison_csv;  // compare only
    std::string diagnostics_json;
    std::string summary;
    /// Hard invariants that failed, by check name.
    std::vector<std::string> failures;
    double wallclock_s = 0.0;    // reported on the console, never written
};

/// Solves, runs the diagnostics and the cheap reference oracles (binomial
/// tree, closed forms). `with_mc` adds the Monte Carlo comparison table.
/// Throws ConfigError for invalid input and InvariantViolation when the
/// solution dips below the obstacle.
RunOutcome run(const RunConfig& rc, int refine, bool with_mc);

/// Writes the artifacts selected by rc.output.formats into `dir`.
void write_artifacts(const RunOutcome& o, const RunConfig& rc, const std::string& dir);

struct CommandOptions {
    std::string config_path;  // empty: all defaults
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    int refine = 0;
};

/// `solve`, `compare` or `selftest`. Returns the process exit code: 0 ok,
/// 2 configuration error, 3 invariant violation, 1 anything else.
int run_command(const std::string& command, const CommandOptions& opt, std::ostream& out, std::ostream& err);

/// Quick structural checks of every module. Returns 0 when all pass, 3 otherwise.
int selftest(std::ostream& out);

}  // namespace levystop
