#include "hwy/rng.hpp"

#include <cmath>

namespace hwy {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

} // namespace

std::uint64_t mix64(std::uint64_t x) {
    std::uint64_t z = x + kGolden;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

RngState RngState::from_seed(std::uint64_t seed) {
    RngState r;
    r.seed = seed;
    std::uint64_t sm = seed;
    for (auto& word : r.s) {
        sm += kGolden;
        std::uint64_t z = sm;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        word = z ^ (z >> 31);
    }
    return r;
}

RngState RngState::substream(std::uint64_t seed, std::uint64_t index) {
    return from_seed(seed ^ mix64(index));
}

std::uint64_t RngState::next_u64() {
    const std::uint64_t result = rotl(s[1] * 5, 7) * 9;
    const std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return result;
}

double RngState::next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngState::next_uniform(double lo, double hi) {
    double v = lo + next_unit() * (hi - lo);
    if (v >= hi) v = std::nextafter(hi, lo); // guard against rounding onto hi
    return v;
}

std::uint64_t RngState::next_below(std::uint64_t bound) {
    // Lemire multiply-shift; bias is < bound / 2^64, irrelevant here.
    return static_cast<std::uint64_t>(
        (static_cast<__uint128_t>(next_u64()) * bound) >> 64);
}

double RngState::next_gaussian() {
    // u1 in (0,1] so the log is finite.
    const double u1 = 1.0 - next_unit();
    const double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Matrix rng_uniform(RngState& rng, double lo, double hi, std::size_t rows, std::size_t cols) {
    if (!(lo < hi)) {
        throw UsageError("rng_uniform: lo (" + std::to_string(lo) + ") must be < hi (" +
                         std::to_string(hi) + ")");
    }
    Matrix m(rows, cols);
    for (auto& v : m.data) v = rng.next_uniform(lo, hi);
    return m;
}

Matrix rng_gaussian(RngState& rng, double mean, double stddev, std::size_t rows, std::size_t cols) {
    if (stddev < 0.0) throw UsageError("rng_gaussian: negative stddev");
    Matrix m(rows, cols);
    for (auto& v : m.data) v = mean + stddev * rng.next_gaussian();
    return m;
}

} // namespace hwy
