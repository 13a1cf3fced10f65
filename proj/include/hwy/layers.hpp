#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "hwy/matrix.hpp"

namespace hwy {

enum class LayerKind { plain, highway };

const char* layer_kind_name(LayerKind k);
LayerKind layer_kind_from_name(const std::string& name);

/// Affine + activation: y = act(x W_H + b_H).
struct PlainLayer {
    Matrix w_h;      // in_dim x out_dim
    Matrix b_h;      // 1 x out_dim
    Activation act = Activation::tanh;

    std::size_t in_dim() const { return w_h.rows; }
    std::size_t out_dim() const { return w_h.cols; }
};

/// Gated layer: y = H(x) . T(x) + x . (1 - T(x)) with
///   H(x) = act(x W_H + b_H) and T(x) = sigmoid(x W_T + b_T).
/// Square by construction: input and output width are both d. The gate
/// nonlinearity is always the logistic function.
struct HighwayLayer {
    Matrix w_h; // d x d
    Matrix b_h; // 1 x d
    Matrix w_t; // d x d
    Matrix b_t; // 1 x d
    Activation act = Activation::tanh;

    std::size_t dim() const { return w_h.rows; }
};

/// Forced constant gate value, detached from the gate parameters. A test
/// hook: the exact-boundary conditions y == x (T = 0) and y == H (T = 1)
/// are unreachable through the sigmoid, so verifying them needs an override.
struct GateClamp {
    double value = 0.0;
};

struct PlainCache {
    Matrix x;   // input
    Matrix pre; // x W + b
    Matrix y;   // act(pre)
};

struct HighwayCache {
    Matrix x;
    Matrix pre_h; // x W_H + b_H
    Matrix h;     // act(pre_h)
    Matrix t;     // gate output (or the clamped constant)
    Matrix y;
    std::optional<GateClamp> clamp; // set when the gate was overridden
};

struct PlainGrads {
    Matrix dw_h;
    Matrix db_h;
};

struct HighwayGrads {
    Matrix dw_h;
    Matrix db_h;
    Matrix dw_t;
    Matrix db_t;
};

struct PlainResult {
    Matrix y;
    PlainCache cache;
};

struct HighwayResult {
    Matrix y;
    HighwayCache cache;
};

struct PlainBackward {
    Matrix dx;
    PlainGrads grads;
};

struct HighwayBackward {
    Matrix dx;
    HighwayGrads grads;
};

PlainResult plain_forward(const PlainLayer& layer, const Matrix& x);
PlainBackward plain_backward(const PlainLayer& layer, const PlainCache& cache, const Matrix& dy);

Matrix transform_gate(const HighwayLayer& layer, const Matrix& x);
HighwayResult highway_forward(const HighwayLayer& layer, const Matrix& x,
                              std::optional<GateClamp> clamp = std::nullopt);
HighwayBackward highway_backward(const HighwayLayer& layer, const HighwayCache& cache,
                                 const Matrix& dy);

struct SoftmaxXent {
    double loss = 0.0;   // mean negative log-likelihood
    Matrix dlogits;      // (probs - onehot) / batch
    Matrix probs;
    std::vector<double> sample_nll; // per-row -log p(label), in row order
};

SoftmaxXent softmax_xent(const Matrix& logits, const std::vector<int>& labels);

/// Row-stable softmax without a loss (for unlabeled traces).
Matrix softmax(const Matrix& logits);

/// First plain layer changes dimensionality, a homogeneous body of width
/// `width` does the depth, and a linear plain layer produces the logits.
struct Architecture {
    std::size_t input_dim = 0;
    std::size_t width = 0;
    std::size_t classes = 0;
    std::size_t body_layers = 0;
    LayerKind kind = LayerKind::highway;
    Activation act = Activation::tanh;
};

struct Network {
    PlainLayer first;
    LayerKind body_kind = LayerKind::highway;
    std::vector<PlainLayer> plain_body;
    std::vector<HighwayLayer> highway_body;
    PlainLayer output; // linear activation, feeds the softmax

    std::size_t body_size() const {
        return body_kind == LayerKind::plain ? plain_body.size() : highway_body.size();
    }
    std::size_t width() const { return first.out_dim(); }
    std::size_t input_dim() const { return first.in_dim(); }
    std::size_t classes() const { return output.out_dim(); }
    Activation body_act() const;
    Architecture architecture() const;
};

struct ForwardTrace {
    PlainCache first;
    std::vector<PlainCache> plain_body;
    std::vector<HighwayCache> highway_body;
    PlainCache output;
    Matrix probs;
};

struct NetworkGrads {
    PlainGrads first;
    std::vector<PlainGrads> plain_body;
    std::vector<HighwayGrads> highway_body;
    PlainGrads output;
    Matrix dx; // gradient with respect to the network input
};

struct EvalOut {
    double loss = 0.0;
    double accuracy = 0.0;
};

struct NetworkForward {
    ForwardTrace trace;
    double loss = 0.0;
    double accuracy = 0.0;
    std::vector<double> sample_nll;
};

/// Unlabeled full forward; probs filled from the logits.
/// `lesion` forces one body highway layer to copy its input exactly.
ForwardTrace network_trace(const Network& net, const Matrix& x,
                           std::optional<std::size_t> lesion = std::nullopt);

NetworkForward network_forward(const Network& net, const Matrix& x,
                               const std::vector<int>& labels);

NetworkGrads network_backward(const Network& net, const ForwardTrace& trace,
                              const std::vector<int>& labels);

/// Evaluation with the transform gates of one body layer forced shut, so the
/// layer copies its input (the lesioning of trained networks). Parameters are
/// untouched; only this evaluation sees the closed gates.
EvalOut lesioned_forward(const Network& net, const Matrix& x, const std::vector<int>& labels,
                         std::size_t lesion_layer);

struct ParamCount {
    std::size_t total = 0;
    std::size_t first = 0;
    std::vector<std::size_t> body;
    std::size_t output = 0;
};

ParamCount param_count(const Network& net);

/// Rows whose argmax (first maximum) equals the label.
std::size_t correct_count(const Matrix& probs, const std::vector<int>& labels);
double accuracy_of(const Matrix& probs, const std::vector<int>& labels);

} // namespace hwy
