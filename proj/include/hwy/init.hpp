#pragma once

#include <cstdint>

#include "hwy/layers.hpp"
#include "hwy/rng.hpp"

namespace hwy {

enum class WeightScheme { normalized_uniform, scaled_gaussian };

const char* weight_scheme_name(WeightScheme s);
WeightScheme weight_scheme_from_name(const std::string& name);

/// Variance-preserving default: normalized_uniform for tanh/sigmoid bodies,
/// scaled_gaussian for relu.
WeightScheme default_scheme_for(Activation act);

struct InitSpec {
    WeightScheme scheme = WeightScheme::normalized_uniform;
    double gate_bias = -1.0; // every b_T entry; negative biases the net toward carry
    std::uint64_t seed = 0;
};

/// normalized_uniform: U(+-sqrt(6 / (fan_in + fan_out)))
/// scaled_gaussian:    N(0, 2 / fan_in)
Matrix init_weights(std::size_t fan_in, std::size_t fan_out, WeightScheme scheme, RngState& rng);

/// All weight matrices drawn from the scheme, b_H zeroed, every b_T entry set
/// to gate_bias. A non-negative gate_bias gets a warning on stderr, not an
/// error.
Network init_network(const Architecture& arch, const InitSpec& spec);

} // namespace hwy
