#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "levystop/levy.hpp"
#include "levystop/solver.hpp"

namespace levystop {

/// A complete run description. Every field has a default, so an empty file
/// is a valid configuration (Black-Scholes American put on the desk grid).
///
/// Text form: one `key = value` per line, `#` starts a comment, and a line
/// `[section]` prefixes the following keys with `section.`. Lists are comma
/// separated. JSON input with nested objects maps onto the same dotted keys.
struct RunConfig {
    struct Problem {
        std::string family = "none";
        LevyModel::Params levy;           // problem.levy.<name>
        double a = 0.045;                 // diffusion coefficient, σ²/2
        std::optional<double> b;          // empty: risk-neutral drift
        double r = 0.05;
        double q = 0.0;                   // dividend yield, used by the risk-neutral drift
        double lambda_floor = 0.0;
        std::string payoff = "put";
        double strike = 1.0;
        double cap = 2.0;                 // capped_call only
        double curvature = 4.0;           // capped_call only
        std::vector<double> custom_x, custom_g;
        std::string custom_csv;
        double T = 1.0;
        bool operator==(const Problem&) const = default;
    } problem;

    struct Numerics {
        double x_lo = -2.0, x_hi = 2.0, pad = 1.0;
        int nx = 400, nt = 200;
        std::vector<double> eps_schedule{0.2, 0.1, 0.05, 0.025, 0.0125};
        double theta = 1.0;
        std::string mode = "projected";
        double eps_split = 0.0;           // <= 0: grid default
        double truncation_tol = 1e-8;
        std::string extension = "clamp_to_payoff";
        std::string op = "full";          // numerics.operator: full | reduced
        double lemma_c = 10.0;
        double gap_tol = 0.0;             // <= 0: mode default
        int collar = 2;
        double terminal_layer = 0.1;      // fraction of T skipped by the residual
        bool operator==(const Numerics&) const = default;
    } numerics;

    struct Oracle {
        bool mc = true;
        bool binomial = true;
        bool series = true;
        int mc_paths = 20000;
        int mc_steps = 50;
        std::uint64_t seed = 20240601;
        double mc_eps = -1.0;             // < 0: family default
        int lsm_degree = 3;
        int binomial_steps = 2000;
        std::vector<double> probe_x{-0.2, 0.0, 0.2};
        std::vector<double> probe_t{0.0};
        bool operator==(const Oracle&) const = default;
    } oracle;

    struct Output {
        std::string dir = "levystop_out";
        std::vector<std::string> formats{"csv", "json"};
        bool operator==(const Output&) const = default;
    } output;

    bool operator==(const RunConfig&) const = default;

    /// Throws ConfigError naming the offending key.
    void set(const std::string& key, const std::string& value);

    /// Canonical text form; parse_text(to_text()) == *this.
    std::string to_text() const;

    /// Physically meaningful checks that do not need a solve (ConfigError).
    void validate() const;
};

RunConfig parse_text(const std::string& text);
RunConfig parse_json(const std::string& text);
/// JSON when the first non-blank character is '{', text form otherwise.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

LevyModel make_model(const RunConfig& rc);
PayoffSpec make_payoff(const RunConfig& rc);

/// Solver configuration with h and Δt halved `refine` times. Errors from the
/// model, payoff or grid come back as ConfigError.
SolveConfig to_solve_config(const RunConfig& rc, int refine = 0);

}  // namespace levystop
