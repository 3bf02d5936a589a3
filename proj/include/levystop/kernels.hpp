#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

// Dense correlation kernels behind the nonlocal jump operator. Every variant
// accumulates in the same order with separate multiply and add, so results
// are bit-identical across instruction sets.
namespace levystop::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa);

/// True if this build contains the variant and the CPU supports it.
bool isa_available(Isa isa);

/// The variant used by the dispatching entry points. Chosen once from CPU
/// features; LEVYSTOP_SIMD=scalar in the environment forces the reference path.
Isa active_isa();

/// Override the dispatch choice (tests and benchmarks). std::nullopt restores
/// automatic selection. Throws UnsupportedOperation for an unavailable ISA.
void force_isa(std::optional<Isa> isa);

/// out[i] = Σ_{k<nw} w[k]·src[i+k]  for i in [0, n). src must hold n+nw-1 values.
void correlate(const double* src, std::size_t n, const double* w, std::size_t nw, double* out);

/// out[i] = Σ_{k<nw} w[k]·(src[i+k] − src[i+center])  for i in [0, n).
void correlate_centered_diff(const double* src, std::size_t n, const double* w, std::size_t nw,
                             std::size_t center, double* out);

namespace scalar {
void correlate(const double* src, std::size_t n, const double* w, std::size_t nw, double* out);
void correlate_centered_diff(const double* src, std::size_t n, const double* w, std::size_t nw,
                             std::size_t center, double* out);
}  // namespace scalar

#if defined(LEVYSTOP_HAVE_AVX2)
namespace avx2 {
void correlate(const double* src, std::size_t n, const double* w, std::size_t nw, double* out);
void correlate_centered_diff(const double* src, std::size_t n, const double* w, std::size_t nw,
                             std::size_t center, double* out);
}  // namespace avx2
#endif

#if defined(LEVYSTOP_HAVE_NEON)
namespace neon {
void correlate(const double* src, std::size_t n, const double* w, std::size_t nw, double* out);
void correlate_centered_diff(const double* src, std::size_t n, const double* w, std::size_t nw,
                             std::size_t center, double* out);
}  // namespace neon
#endif

}  // namespace levystop::kernels
