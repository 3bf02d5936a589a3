#include <atomic>
#include <cstdlib>
#include <string>

#include "levystop/errors.hpp"
#include "levystop/kernels.hpp"

namespace levystop::kernels {

namespace {

Isa detect() {
    if (const char* env = std::getenv("LEVYSTOP_SIMD"); env && std::string(env) == "scalar") return Isa::Scalar;
    if (isa_available(Isa::Avx2)) return Isa::Avx2;
    if (isa_available(Isa::Neon)) return Isa::Neon;
    return Isa::Scalar;
}

// -1: automatic; otherwise the forced Isa value.
std::atomic<int> g_forced{-1};

}  // namespace

std::string_view to_string(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
        case Isa::Neon: return "neon";
    }
    return "scalar";
}

bool isa_available(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return true;
        case Isa::Avx2:
#if defined(LEVYSTOP_HAVE_AVX2)
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
        case Isa::Neon:
#if defined(LEVYSTOP_HAVE_NEON)
            return true;
#else
            return false;
#endif
    }
    return false;
}

Isa active_isa() {
    const int forced = g_forced.load(std::memory_order_relaxed);
    if (forced >= 0) return static_cast<Isa>(forced);
    static const Isa detected = detect();
    return detected;
}

void force_isa(std::optional<Isa> isa) {
    if (isa && !isa_available(*isa)) {
        throw UnsupportedOperation("instruction set '" + std::string(to_string(*isa)) + "' is not available");
    }
    g_forced.store(isa ? static_cast<int>(*isa) : -1, std::memory_order_relaxed);
}

void correlate(const double* src, std::size_t n, const double* w, std::size_t nw, double* out) {
    switch (active_isa()) {
#if defined(LEVYSTOP_HAVE_AVX2)
        case Isa::Avx2: return avx2::correlate(src, n, w, nw, out);
#endif
#if defined(LEVYSTOP_HAVE_NEON)
        case Isa::Neon: return neon::correlate(src, n, w, nw, out);
#endif
        default: return scalar::correlate(src, n, w, nw, out);
    }
}

void correlate_centered_diff(const double* src, std::size_t n, const double* w, std::size_t nw,
                             std::size_t center, double* out) {
    switch (active_isa()) {
#if defined(LEVYSTOP_HAVE_AVX2)
        case Isa::Avx2: return avx2::correlate_centered_diff(src, n, w, nw, center, out);
#endif
#if defined(LEVYSTOP_HAVE_NEON)
        case Isa::Neon: return neon::correlate_centered_diff(src, n, w, nw, center, out);
#endif
        default: return scalar::correlate_centered_diff(src, n, w, nw, center, out);
    }
}

}  // namespace levystop::kernels
