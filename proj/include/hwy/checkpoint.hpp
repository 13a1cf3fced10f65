#pragma once

#include <string>

#include "hwy/layers.hpp"

namespace hwy {

/// Self-describing binary network container. Layout (all little-endian):
///   char[4]  magic "HWY1"
///   u32      format version (1)
///   u32      layer count (first + body + output)
///   per layer:
///     u8  kind (0 plain, 1 highway)
///     u8  activation (0 sigmoid, 1 tanh, 2 relu, 3 linear)
///     u32 in_dim, u32 out_dim
///     f64[in*out] W_H, f64[out] b_H
///     highway only: f64[in*out] W_T, f64[out] b_T
void save_checkpoint(const Network& net, const std::string& path);

Network load_checkpoint(const std::string& path);

} // namespace hwy
