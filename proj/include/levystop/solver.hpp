#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "levystop/generator.hpp"
#include "levystop/grid.hpp"
#include "levystop/levy.hpp"
#include "levystop/payoff.hpp"
#include "levystop/penalty.hpp"
#include "levystop/tridiag.hpp"

namespace levystop {

enum class SolveMode { Penalized, ProjectedImplicit, EuropeanCauchy };

std::string_view to_string(SolveMode m);
SolveMode solve_mode_from_string(std::string_view name);

/// Everything needed to march the obstacle problem. Time in the solver runs
/// forward, τ = T - t; reports are converted back to calendar time.
struct SolveConfig {
    SpaceTimeGrid grid;
    LevyModel model;
    CoefficientField coeffs = CoefficientField::constant(0.02, 0.0, 0.05);
    PayoffSpec payoff = PayoffSpec::put(1.0);
    std::vector<double> eps_schedule{0.2, 0.1, 0.05, 0.025, 0.0125};
    double theta = 1.0;
    SolveMode mode = SolveMode::Penalized;
    /// Split point of the jump integral; <= 0 picks default_eps_split(h).
    double eps_split = 0.0;
    /// Jumps with tail mass below this are dropped.
    double truncation_tol = 1e-8;
    Extension extension = Extension::ClampToPayoff;
    /// March with I^f and the drift b - fv_drift. Finite-variation jumps only.
    bool reduced_operator = false;
    /// Right-hand side f(x, τ) of the Cauchy problem (EuropeanCauchy only).
    std::function<double(double x, double tau)> source;

    double resolved_eps_split() const;

    /// Throws ConfigError on a bad grid, coefficients, schedule or θ, and when
    /// the explicit part exceeds its monotonicity budget.
    void validate() const;
};

/// Δt times the rate of the explicit part: Σ|w| + (1-θ)(2·α⁰/h² + r⁰), with
/// α⁰ the largest implicit diffusion. Must stay <= 0.9.
double explicit_budget(const SolveConfig& cfg);

/// Per-ε summary of a penalized run (values in forward time).
struct EpsStats {
    double eps = 0.0;
    double anchor = 0.0;     // p_ε(0)
    double v_min = 0.0, v_max = 0.0;
    double gap_min = 0.0;    // min (v - g^ε)
    double p_min = 0.0, p_max = 0.0;  // range of p_ε(v - g^ε)
    double grad_max = 0.0;   // max |D₀ v| on the unpadded window
};

struct SolveReport {
    SolveMode mode = SolveMode::Penalized;
    /// u(x, t) on calendar time rows: row n is t_n, row nt is the terminal slice.
    GridFunction value;
    /// The obstacle the last solve used (g^ε for Penalized, g otherwise).
    PayoffSpec obstacle = PayoffSpec::put(1.0);
    /// Per calendar time row: free-boundary crossings of u - g.
    std::vector<std::vector<double>> boundary;
    std::map<std::string, double> residuals;
    /// Sup-norm distance between successive ε solutions on the unpadded window.
    std::vector<double> eps_trace;
    std::vector<EpsStats> eps_stats;
    double anchor = 0.0;
    double eps_split = 0.0;
    double truncation_mass = 0.0;
    double wallclock_s = 0.0;
    long steps = 0;
    std::vector<std::string> warnings;
};

/// One θ-step of the forward equation
///   ∂_τ v = (L_D + I - r) v - p_ε(v - g^ε) + f.
/// The local part, the small jumps (frozen at the node) and the compensator
/// drift are implicit. Big jumps are explicit. The penalty is linearized
/// about the old level, which keeps the step monotone for any ε.
class Stepper {
public:
    explicit Stepper(const SolveConfig& cfg);

    const NonlocalStencil& stencil() const { return stencil_; }
    int reach() const { return reach_; }

    /// Far-field values on the extended row (reach() nodes each side),
    /// multiplied by `discount_rate`·τ-discounting when that is nonzero.
    void set_far_field(std::vector<double> ext_values, double discount_rate = 0.0);

    /// Advances v from τ_n to τ_{n+1}. `penalty` and `obstacle` may be null /
    /// empty; `project` solves the implicit step as a complementarity problem
    /// against the obstacle.
    void step(std::span<const double> v_now, int n, const PenaltySpec* penalty, std::span<const double> obstacle,
              bool project, std::span<double> v_next);

private:
    double far(std::size_t ext_index, double tau) const;
    void fill_extended(std::span<const double> v, double tau);
    void solve_complementarity(std::span<const double> v_old, std::span<const double> g);

    SolveConfig cfg_;
    NonlocalStencil stencil_;  // big jumps only
    double half_small_var_ = 0.0, comp_ = 0.0;
    int reach_ = 0;
    std::vector<double> far_ext_;
    double discount_rate_ = 0.0;
    std::vector<double> ext_, jumps_, rhs_, scratch_;
    Tridiagonal mat_, work_;
    std::vector<double> sol_;
    std::vector<char> active_;
};

/// Convenience single step with a freshly built Stepper and the obstacle
/// g^ε as far field.
std::vector<double> step_penalized(std::span<const double> v_now, int n, double eps, const PenaltySpec& p,
                                   const SolveConfig& cfg);

/// Full penalized march for one ε from v(·, 0) = g^ε.
SolveReport solve_penalized(const SolveConfig& cfg, double eps);

/// Penalized mode: every ε of the schedule, concurrently, reporting the last
/// and the successive sup-norm deltas. ProjectedImplicit: one projected
/// march. EuropeanCauchy: the obstacle-free problem.
SolveReport solve_vi(const SolveConfig& cfg);

/// Obstacle-free march from the raw payoff, with cfg.source as forcing.
SolveReport solve_european(const SolveConfig& cfg);

/// min{(-∂_t - L + r) u, u - g} on unpadded nodes of rows 0..nt-2, using
/// fourth-order differences in x and a second-order difference in t. NaN on
/// the last two rows, in the padding and within `collar` nodes of a change
/// of region in any row the stencil touches (u - g <= gap_tol is stopping).
/// Rows with T - t < terminal_layer are skipped too: at a payoff kink ∂_t u
/// blows up like (T - t)^{-1/2}, so no pointwise rate holds there.
GridFunction residual_vi(const GridFunction& u, const SolveConfig& cfg, double gap_tol, int collar = 2,
                         double terminal_layer = 0.0);

}  // namespace levystop
