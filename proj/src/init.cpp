#include "hwy/init.hpp"

#include <cmath>
#include <iostream>

namespace hwy {

const char* weight_scheme_name(WeightScheme s) {
    return s == WeightScheme::normalized_uniform ? "normalized_uniform" : "scaled_gaussian";
}

WeightScheme weight_scheme_from_name(const std::string& name) {
    if (name == "normalized_uniform") return WeightScheme::normalized_uniform;
    if (name == "scaled_gaussian") return WeightScheme::scaled_gaussian;
    throw UsageError("unknown weight scheme: " + name);
}

WeightScheme default_scheme_for(Activation act) {
    return act == Activation::relu ? WeightScheme::scaled_gaussian
                                   : WeightScheme::normalized_uniform;
}

Matrix init_weights(std::size_t fan_in, std::size_t fan_out, WeightScheme scheme, RngState& rng) {
    if (fan_in == 0 || fan_out == 0) {
        throw UsageError("init_weights: zero dimension (" + std::to_string(fan_in) + "x" +
                         std::to_string(fan_out) + ")");
    }
    if (scheme == WeightScheme::normalized_uniform) {
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        return rng_uniform(rng, -bound, bound, fan_in, fan_out);
    }
    const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
    return rng_gaussian(rng, 0.0, stddev, fan_in, fan_out);
}

Network init_network(const Architecture& arch, const InitSpec& spec) {
    if (arch.input_dim == 0 || arch.width == 0 || arch.classes == 0) {
        throw UsageError("init_network: architecture has a zero dimension");
    }
    if (arch.kind == LayerKind::highway && spec.gate_bias >= 0.0) {
        std::cerr << "warning: non-negative transform gate bias " << spec.gate_bias
                  << "; the network will not start in carry behavior\n";
    }
    RngState rng = RngState::from_seed(spec.seed);
    Network net;
    net.body_kind = arch.kind;

    net.first.w_h = init_weights(arch.input_dim, arch.width, spec.scheme, rng);
    net.first.b_h = Matrix(1, arch.width);
    net.first.act = arch.act;

    for (std::size_t l = 0; l < arch.body_layers; ++l) {
        if (arch.kind == LayerKind::plain) {
            PlainLayer layer;
            layer.w_h = init_weights(arch.width, arch.width, spec.scheme, rng);
            layer.b_h = Matrix(1, arch.width);
            layer.act = arch.act;
            net.plain_body.push_back(std::move(layer));
        } else {
            HighwayLayer layer;
            layer.w_h = init_weights(arch.width, arch.width, spec.scheme, rng);
            layer.b_h = Matrix(1, arch.width);
            layer.w_t = init_weights(arch.width, arch.width, spec.scheme, rng);
            layer.b_t = Matrix(1, arch.width, spec.gate_bias);
            layer.act = arch.act;
            net.highway_body.push_back(std::move(layer));
        }
    }

    net.output.w_h = init_weights(arch.width, arch.classes, spec.scheme, rng);
    net.output.b_h = Matrix(1, arch.classes);
    net.output.act = Activation::linear;
    return net;
}

} // namespace hwy
