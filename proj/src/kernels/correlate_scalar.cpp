#include "levystop/kernels.hpp"

namespace levystop::kernels::scalar {

void correlate(const double* src, std::size_t n, const double* w, std::size_t nw, double* out) {
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < nw; ++k) acc += w[k] * src[i + k];
        out[i] = acc;
    }
}

void correlate_centered_diff(const double* src, std::size_t n, const double* w, std::size_t nw,
                             std::size_t center, double* out) {
    for (std::size_t i = 0; i < n; ++i) {
        const double c = src[i + center];
        double acc = 0.0;
        for (std::size_t k = 0; k < nw; ++k) acc += w[k] * (src[i + k] - c);
        out[i] = acc;
    }
}

}  // namespace levystop::kernels::scalar
