#include <arm_neon.h>

#include "levystop/kernels.hpp"

namespace levystop::kernels::neon {

void correlate(const double* src, std::size_t n, const double* w, std::size_t nw, double* out) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t acc = vdupq_n_f64(0.0);
        for (std::size_t k = 0; k < nw; ++k) {
            acc = vaddq_f64(acc, vmulq_f64(vdupq_n_f64(w[k]), vld1q_f64(src + i + k)));
        }
        vst1q_f64(out + i, acc);
    }
    if (i < n) scalar::correlate(src + i, n - i, w, nw, out + i);
}

void correlate_centered_diff(const double* src, std::size_t n, const double* w, std::size_t nw,
                             std::size_t center, double* out) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t c = vld1q_f64(src + i + center);
        float64x2_t acc = vdupq_n_f64(0.0);
        for (std::size_t k = 0; k < nw; ++k) {
            const float64x2_t d = vsubq_f64(vld1q_f64(src + i + k), c);
            acc = vaddq_f64(acc, vmulq_f64(vdupq_n_f64(w[k]), d));
        }
        vst1q_f64(out + i, acc);
    }
    if (i < n) scalar::correlate_centered_diff(src + i, n - i, w, nw, center, out + i);
}

}  // namespace levystop::kernels::neon
