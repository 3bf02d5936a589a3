#include <immintrin.h>

#include "levystop/kernels.hpp"

// Four outputs per iteration; lane j accumulates exactly the scalar sequence
// for output i+j. No FMA: mul and add round separately, as in the scalar path.
namespace levystop::kernels::avx2 {

void correlate(const double* src, std::size_t n, const double* w, std::size_t nw, double* out) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t k = 0; k < nw; ++k) {
            const __m256d wk = _mm256_broadcast_sd(w + k);
            acc = _mm256_add_pd(acc, _mm256_mul_pd(wk, _mm256_loadu_pd(src + i + k)));
        }
        _mm256_storeu_pd(out + i, acc);
    }
    if (i < n) scalar::correlate(src + i, n - i, w, nw, out + i);
}

void correlate_centered_diff(const double* src, std::size_t n, const double* w, std::size_t nw,
                             std::size_t center, double* out) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d c = _mm256_loadu_pd(src + i + center);
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t k = 0; k < nw; ++k) {
            const __m256d wk = _mm256_broadcast_sd(w + k);
            const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(src + i + k), c);
            acc = _mm256_add_pd(acc, _mm256_mul_pd(wk, d));
        }
        _mm256_storeu_pd(out + i, acc);
    }
    if (i < n) scalar::correlate_centered_diff(src + i, n - i, w, nw, center, out + i);
}

}  // namespace levystop::kernels::avx2
