#pragma once

#include <span>
#include <vector>

#include "levystop/grid.hpp"
#include "levystop/levy.hpp"

namespace levystop {

/// How the small-jump part I_ε φ = ∫_{|y|<=ε} [φ(x+y) - φ(x) - y φ'(x)] ν(dy)
/// is discretized.
enum class SmallJumpRule {
    /// φ'' interpolated linearly between nodes inside the Taylor remainder:
    /// Σ_j q_j δ²φ_{i+j}. Second order, used for operator evaluation.
    Interpolated,
    /// φ'' frozen at the node: ½·small_var(ε)·δ²φ_i. A pure diffusion term
    /// that keeps the implicit step an M-matrix.
    Frozen,
};

/// Discrete jump operator on a uniform grid of spacing h:
///   (Iφ)_i = Σ_k w_k (φ_{i+k} - φ_i) - comp·D₀φ_i + small-jump term.
struct NonlocalStencil {
    double h = 0.0;
    double eps = 0.0;     // split point; 0 for the reduced operator
    double radius = 0.0;  // jumps beyond ±radius are dropped
    double neglected = 0.0;  // ∫_{|y|>radius} (1+|y|) ν(dy)
    bool reduced = false;

    int k_min = 0;  // offset of w[0]
    std::vector<double> w;
    double comp = 0.0;

    SmallJumpRule rule = SmallJumpRule::Interpolated;
    double half_small_var = 0.0;  // ½ ∫_{|y|<=ε} y² ν(dy)
    int j_max = 0;                // q has offsets -j_max..j_max
    std::vector<double> q;

    int k_max() const { return k_min + static_cast<int>(w.size()) - 1; }
    /// Largest |offset| read by apply(), including the δ² and D₀ stencils.
    int reach() const;
    /// Σ_k |w_k|, the explicit part's rate bound.
    double weight_sum() const;
};

/// Default split point: √h clamped to [h, 1].
double default_eps_split(double h);

/// Builds the ε-split stencil. radius <= 0 selects the model's truncation radius.
NonlocalStencil build_nonlocal_stencil(const LevyModel& model, double h, double eps_split,
                                       SmallJumpRule rule = SmallJumpRule::Interpolated, double radius = 0.0);

/// Stencil of I^f φ = ∫ [φ(x+y) - φ(x)] ν(dy). Requires α < 1.
NonlocalStencil build_reduced_stencil(const LevyModel& model, double h, double radius = 0.0);

/// Applies the stencil to a row that carries s.reach() extension values on
/// both sides: row[left + i] is node i. Writes out.size() node values.
void apply_stencil(const NonlocalStencil& s, std::span<const double> row, int left, std::span<double> out);

/// Local operator a ∂²ₓφ + b ∂ₓφ by central differences at every node, with
/// coefficients taken at calendar time grid.t(n).
std::vector<double> apply_local(const GridFunction& phi, const CoefficientField& c, int n);

/// I^ε φ + I_ε φ at every node of time row n (interpolated small-jump rule).
std::vector<double> apply_nonlocal(const GridFunction& phi, const LevyModel& model, double eps_split, int n);

/// I^f φ at every node of time row n. Callers pair it with the drift b - fv_drift.
std::vector<double> apply_reduced(const GridFunction& phi, const LevyModel& model, int n);

/// max over interior nodes of |(L_D φ + Iφ) - (L_D^f φ + I^f φ)| on row n.
/// The local parts differ only by fv_drift·∂ₓφ, so no coefficients are needed.
double consistency_check(const LevyModel& model, const GridFunction& phi, int n = 0, double eps_split = 0.0);

}  // namespace levystop
