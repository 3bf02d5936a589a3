#pragma once

#include <span>

#include "levystop/grid.hpp"
#include "levystop/levy.hpp"
#include "levystop/payoff.hpp"

namespace levystop {

/// Smooth concave penalty y -> p(y): zero for y >= eps/2 + eps/8, equal to
/// p0 + s·y near 0 with s = -2·p0/eps, nonpositive and nondecreasing.
///
/// It is the bump mollification (width eps/8) of min(s·(y - eps/2), 0), which
/// has the closed form s·w·upper_ramp((y - eps/2)/w).
class PenaltySpec {
public:
    /// eps in (0, 1), p0 <= 0.
    static PenaltySpec build(double eps, double p0);

    double eps() const { return eps_; }
    double p0() const { return p0_; }
    double kernel_width() const { return width_; }
    /// Slope of the linear branch, -2·p0/eps.
    double slope() const { return slope_; }
    /// Upper bound of p'; attained on the linear branch.
    double max_derivative() const { return slope_; }
    /// Smallest y with p(y) = 0 identically beyond it.
    double support_end() const { return 0.5 * eps_ + width_; }

    double operator()(double y) const;
    double derivative(double y) const;
    double second_derivative(double y) const;

    /// out[i] = p(v[i] - g[i]).
    void apply(std::span<const double> v, std::span<const double> g, std::span<double> out) const;

private:
    double eps_ = 0.0, p0_ = 0.0, width_ = 0.0, slope_ = 0.0;
};

/// The depth p(0) needed for the penalized solution to stay above the
/// obstacle:
///   -a⁰J - |b|⁰L - r⁰K - J ∫_{|y|<=1} y² ν(dy) - K ∫_{|y|>1} ν(dy)
/// with a⁰, |b|⁰, r⁰ the coefficient maxima over the grid.
double penalty_anchor(const CoefficientField& c, const PayoffSpec& g, const LevyModel& m, const SpaceTimeGrid& grid);

}  // namespace levystop
