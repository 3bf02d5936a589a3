#pragma once

#include <functional>
#include <span>

namespace levystop::quad {

using Integrand = std::function<double(double)>;

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
struct GaussRule {
    std::span<const double> nodes;
    std::span<const double> weights;
};

/// Cached Gauss–Legendre rule. n must be in [1, 256].
GaussRule gauss_legendre(int n);

/// Fixed 64-point Gauss–Legendre on [a, b].
double gauss64(const Integrand& f, double a, double b);

/// Globally adaptive Gauss–Kronrod (7/15) on [a, b]; b may be +infinity.
/// Stops when the summed error estimate is below rel_tol times the L1 norm
/// of the integrand, or after 4000 pieces.
double adaptive(const Integrand& f, double a, double b, double rel_tol);

/// ∫_lo^hi f over dyadic pieces [lo·2^k, lo·2^{k+1}] (0 < lo < hi < ∞), each
/// refined adaptively. Keeps power-law and exponential variation per piece mild.
double dyadic(const Integrand& f, double lo, double hi, double rel_tol);

/// ∫_0^hi f where f(y) ~ y^power as y -> 0 (power > -1). Uses y = hi·s^m with
/// m = 1/(power+1) so that the transformed integrand is bounded at s = 0.
double power_singular(const Integrand& f, double hi, double power, double rel_tol);

}  // namespace levystop::quad
