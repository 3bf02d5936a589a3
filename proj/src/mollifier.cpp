#include "levystop/mollifier.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "levystop/quadrature.hpp"

namespace levystop::bump {

double kernel(double t) {
    const double q = 1.0 - t * t;
    if (!(q > 0.0)) return 0.0;
    return std::exp(-1.0 / q) / kNormalizer;
}

double cdf(double t) {
    if (t <= -1.0) return 0.0;
    if (t >= 1.0) return 1.0;
    // The integrand is symmetric; integrate the shorter tail for accuracy.
    if (t > 0.0) return 1.0 - cdf(-t);
    return quad::gauss64(kernel, -1.0, t);
}

double upper_ramp(double t) {
    if (t >= 1.0) return 0.0;
    if (t <= -1.0) return t;
    return quad::gauss64([t](double s) { return (t - s) * kernel(s); }, t, 1.0);
}

double convolve(const std::function<double(double)>& f, double x, double w, std::span<const double> kinks) {
    std::vector<double> cuts{-w, -0.5 * w, 0.0, 0.5 * w, w};
    for (double k : kinks) {
        const double z = x - k;
        if (z > -w && z < w) cuts.push_back(z);
    }
    std::sort(cuts.begin(), cuts.end());
    // Dividing by the discrete kernel mass makes constants exact.
    double sum = 0.0, mass = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (!(cuts[i + 1] > cuts[i])) continue;
        sum += quad::gauss64([&](double z) { return f(x - z) * kernel(z / w); }, cuts[i], cuts[i + 1]);
        mass += quad::gauss64([&](double z) { return kernel(z / w); }, cuts[i], cuts[i + 1]);
    }
    return sum / mass;
}

}  // namespace levystop::bump
