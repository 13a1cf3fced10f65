#pragma once

#include <array>
#include <cstdint>

#include "hwy/matrix.hpp"

namespace hwy {

/// xoshiro256** seeded through a splitmix64 expansion. Bit-exact across
/// platforms, which every determinism contract in this project leans on.
struct RngState {
    std::array<std::uint64_t, 4> s{};
    std::uint64_t seed = 0; // the 64-bit seed this state was derived from

    static RngState from_seed(std::uint64_t seed);
    /// Disjoint deterministic stream for (seed, index), used to give every
    /// search trial, epoch shuffle and stratum its own generator.
    static RngState substream(std::uint64_t seed, std::uint64_t index);

    std::uint64_t next_u64();
    /// Uniform in [0, 1) with 53 random bits.
    double next_unit();
    double next_uniform(double lo, double hi);
    /// Uniform integer in [0, bound), bound > 0.
    std::uint64_t next_below(std::uint64_t bound);
    /// Standard normal via Box-Muller (consumes two uniform draws).
    double next_gaussian();
};

/// splitmix64 finalizer; also the golden-ratio mix used for substreams.
std::uint64_t mix64(std::uint64_t x);

Matrix rng_uniform(RngState& rng, double lo, double hi, std::size_t rows, std::size_t cols);
Matrix rng_gaussian(RngState& rng, double mean, double stddev, std::size_t rows, std::size_t cols);

} // namespace hwy
