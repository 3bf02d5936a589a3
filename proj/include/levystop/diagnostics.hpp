#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "levystop/grid.hpp"
#include "levystop/payoff.hpp"
#include "levystop/solver.hpp"

namespace levystop {

/// Points where gap - tol changes sign along a spatial row, located by
/// linear interpolation of the gap. Nodes with gap <= tol count as stopping.
std::vector<double> boundary_crossings(std::span<const double> gap, const SpaceTimeGrid& grid, double tol);

enum class Region : std::uint8_t { Continuation, Stopping };

std::string_view to_string(Region r);

struct RegionPartition {
    SpaceTimeGrid grid;
    double tol = 0.0;
    std::vector<Region> labels;          // row-major in time, like GridFunction
    std::vector<double> gap;             // u - g, same layout
    std::vector<double> obstacle;        // g on one spatial row
    std::vector<std::vector<double>> boundary;  // per time row

    Region label(int i, int n) const { return labels[index(i, n)]; }
    double gap_at(int i, int n) const { return gap[index(i, n)]; }

private:
    std::size_t index(int i, int n) const {
        return static_cast<std::size_t>(n) * static_cast<std::size_t>(grid.points()) + static_cast<std::size_t>(i);
    }
};

/// Labels nodes with u - g <= tol as stopping. Throws InvariantViolation
/// ("obstacle") when u < g - tol somewhere.
RegionPartition partition(const GridFunction& u, const PayoffSpec& g, double tol);

struct SmoothFitSample {
    int n = 0;
    double t = 0.0;
    double b = 0.0;         // boundary location
    double left = 0.0;      // ∂ₓu extrapolated to b from the left nodes
    double right = 0.0;     // and from the right
    double gap = 0.0;       // |left - right|
    bool unreliable = false;  // within 3 nodes of the unpadded window edge
};

/// One-sided slopes of u at every exercise boundary (crossings where g > tol)
/// of rows 0..nt-1. Each side extrapolates its own midpoint differences
/// linearly to the contact point, which is placed where the square root of
/// u - g extrapolates to zero.
std::vector<SmoothFitSample> smooth_fit_gap(const GridFunction& u, const RegionPartition& part);

struct SmoothFitSummary {
    double max = 0.0;
    double rms = 0.0;
    int count = 0;
};

/// Max and root-mean-square gap over reliable samples with t <= t_max.
SmoothFitSummary summarize_smooth_fit(std::span<const SmoothFitSample> samples, double t_max);

struct HolderSeminorm {
    double x = 0.0;  // spatial quotient, exponent exp_x
    double t = 0.0;  // temporal quotient, exponent exp_t
};

/// Largest difference quotients over node pairs at distance <= window (in x
/// for the spatial part, in t for the temporal part), restricted to the
/// unpadded window. window <= 0 picks min(1, width / 4).
HolderSeminorm holder_seminorm(const GridFunction& f, double exp_x, double exp_t, double window = 0.0);

/// Space-time box for the Sobolev norms, in calendar time.
struct NormWindow {
    double x_lo = -0.5, x_hi = 0.5;
    double t_lo = 0.1, t_hi = 0.5;
};

struct SobolevRow {
    double h = 0.0, dt = 0.0;
    double norm_t = 0.0, norm_x = 0.0, norm_xx = 0.0;  // discrete L_p
    double max_xx = 0.0;                                // sup of |∂²ₓu|
};

struct SobolevTable {
    double p = 2.0;
    std::vector<SobolevRow> rows;  // coarsest first
    /// Finest-level norm <= 2 × coarsest-level norm, per derivative.
    bool stable_t = false, stable_x = false, stable_xx = false;
    bool stable() const { return stable_t && stable_x && stable_xx; }
};

/// Needs at least three levels, and a window with one node of margin inside
/// every level's unpadded grid. Derivatives are centered differences.
SobolevTable sobolev_stability(std::span<const GridFunction> levels, double p, const NormWindow& w);

struct LemmaCheck {
    bool pass = false;
    double measured = 0.0;
    double bound = 0.0;
};

struct LemmaSuite {
    double tol = 0.0;
    std::map<std::string, LemmaCheck> checks;
    bool all_pass() const;
};

/// Bounds 0 <= v <= K + 1, v >= g^ε and anchor <= p_ε(v - g^ε) <= 0 for every
/// ε of a penalized report, and the spread of max|∂ₓv| across ε below 20%,
/// each with tolerance c(h² + Δt) + 1e-9. Other modes get the bound and
/// obstacle checks on the value surface.
LemmaSuite lemma_suite(const SolveReport& report, const SolveConfig& cfg, double c = 10.0);

}  // namespace levystop
