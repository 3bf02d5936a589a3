#pragma once

#include <array>
#include <cstdint>

namespace levystop {

/// Philox4x32-10 counter-based generator: a keyed bijection on 128-bit
/// counters. Streams for different (seed, stream id) pairs never overlap.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key);

/// Sequential draws from one Philox stream. The seed is the key; the stream
/// id fills the upper counter words; the lower words count blocks.
class PhiloxStream {
public:
    PhiloxStream(std::uint64_t seed, std::uint64_t stream);

    std::uint32_t next_u32();
    /// Uniform on (0, 1) with 53 random bits; never returns 0 or 1.
    double uniform();
    /// Standard normal by Box–Muller (pairs are cached).
    double normal();
    /// Poisson(mean) by inversion for small means and by summing unit-rate
    /// exponentials otherwise.
    std::uint32_t poisson(double mean);

private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int used_ = 4;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace levystop
