#pragma once

#include <functional>
#include <span>

namespace levystop::bump {

/// ∫_{-1}^{1} exp(-1/(1-t²)) dt.
inline constexpr double kNormalizer = 0.443993816168079;

/// Normalized bump η(t) = exp(-1/(1-t²)) / Z on (-1, 1), zero outside.
double kernel(double t);

/// ∫_{-1}^{t} η.
double cdf(double t);

/// ∫_{t}^{1} (t - s) η(s) ds, an antiderivative of 1 - cdf(t). Equals t for
/// t <= -1 and 0 for t >= 1.
double upper_ramp(double t);

/// (f ⋆ η_w)(x) = ∫ f(x - z) η(z/w)/w dz. `kinks` lists points where f is
/// not smooth; the integral is split there so the Gauss rule stays spectral.
double convolve(const std::function<double(double)>& f, double x, double w, std::span<const double> kinks = {});

}  // namespace levystop::bump
