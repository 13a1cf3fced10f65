#include "hwy/layers.hpp"

#include <algorithm>
#include <cmath>

namespace hwy {

const char* layer_kind_name(LayerKind k) {
    return k == LayerKind::plain ? "plain" : "highway";
}

LayerKind layer_kind_from_name(const std::string& name) {
    if (name == "plain") return LayerKind::plain;
    if (name == "highway") return LayerKind::highway;
    throw UsageError("unknown layer kind: " + name);
}

namespace {

Matrix act_grad_from_cache(Activation act, const PlainCache& c) {
    return activation_grad(act, act == Activation::relu ? c.pre : c.y);
}

Matrix act_grad_from_cache(Activation act, const HighwayCache& c) {
    return activation_grad(act, act == Activation::relu ? c.pre_h : c.h);
}

} // namespace

PlainResult plain_forward(const PlainLayer& layer, const Matrix& x) {
    if (x.cols != layer.in_dim()) {
        throw ShapeError("plain_forward: input " + x.shape_str() + " does not match layer " +
                         layer.w_h.shape_str());
    }
    PlainResult r;
    r.cache.x = x;
    r.cache.pre = add_row_bias(matmul(x, layer.w_h), layer.b_h);
    r.cache.y = activation(layer.act, r.cache.pre);
    r.y = r.cache.y;
    return r;
}

PlainBackward plain_backward(const PlainLayer& layer, const PlainCache& cache, const Matrix& dy) {
    if (!dy.same_shape(cache.y)) {
        throw ShapeError("plain_backward: dy " + dy.shape_str() + " does not match cached y " +
                         cache.y.shape_str());
    }
    const Matrix dz = hadamard(dy, act_grad_from_cache(layer.act, cache));
    PlainBackward out;
    out.grads.dw_h = matmul_tn(cache.x, dz);
    out.grads.db_h = col_sum(dz);
    out.dx = matmul(dz, transpose(layer.w_h));
    return out;
}

Matrix transform_gate(const HighwayLayer& layer, const Matrix& x) {
    if (x.cols != layer.dim()) {
        throw ShapeError("transform_gate: input " + x.shape_str() + " does not match layer " +
                         layer.w_t.shape_str());
    }
    return activation(Activation::sigmoid, add_row_bias(matmul(x, layer.w_t), layer.b_t));
}

HighwayResult highway_forward(const HighwayLayer& layer, const Matrix& x,
                              std::optional<GateClamp> clamp) {
    if (x.cols != layer.dim()) {
        throw ShapeError("highway_forward: input " + x.shape_str() + " does not match layer " +
                         layer.w_h.shape_str());
    }
    HighwayResult r;
    HighwayCache& c = r.cache;
    c.x = x;
    c.pre_h = add_row_bias(matmul(x, layer.w_h), layer.b_h);
    c.h = activation(layer.act, c.pre_h);
    c.clamp = clamp;
    if (clamp) {
        c.t = Matrix(x.rows, x.cols, clamp->value);
        if (clamp->value == 0.0) {
            c.y = x; // exact copy, not 0*H + 1*x
        } else if (clamp->value == 1.0) {
            c.y = c.h;
        } else {
            c.y = add(hadamard(c.h, c.t), hadamard(x, sub(Matrix(x.rows, x.cols, 1.0), c.t)));
        }
    } else {
        c.t = transform_gate(layer, x);
        c.y = Matrix(x.rows, x.cols);
        for (std::size_t i = 0; i < c.y.data.size(); ++i) {
            const double t = c.t.data[i];
            c.y.data[i] = c.h.data[i] * t + x.data[i] * (1.0 - t);
        }
        c.y.assert_finite("highway_forward");
    }
    r.y = c.y;
    return r;
}

HighwayBackward highway_backward(const HighwayLayer& layer, const HighwayCache& cache,
                                 const Matrix& dy) {
    if (!dy.same_shape(cache.y)) {
        throw ShapeError("highway_backward: dy " + dy.shape_str() + " does not match cached y " +
                         cache.y.shape_str());
    }
    const std::size_t d = layer.dim();
    HighwayBackward out;

    if (cache.clamp && cache.clamp->value == 0.0) {
        // Pure carry: the layer was an exact copy, gradients vanish.
        out.dx = dy;
        out.grads.dw_h = Matrix(d, d);
        out.grads.db_h = Matrix(1, d);
        out.grads.dw_t = Matrix(d, d);
        out.grads.db_t = Matrix(1, d);
        return out;
    }

    // dH = T . dy, dT = (H - x) . dy, carry dx = (1 - T) . dy
    const Matrix dh = hadamard(cache.t, dy);
    const Matrix dz_h = hadamard(dh, act_grad_from_cache(layer.act, cache));
    out.grads.dw_h = matmul_tn(cache.x, dz_h);
    out.grads.db_h = col_sum(dz_h);
    const Matrix dx_h = matmul(dz_h, transpose(layer.w_h));

    if (cache.clamp) {
        // Gate detached: no gate gradients, no gate path into dx.
        out.grads.dw_t = Matrix(d, d);
        out.grads.db_t = Matrix(1, d);
        if (cache.clamp->value == 1.0) {
            out.dx = dx_h; // exactly the backward of H alone
        } else {
            Matrix carry(dy.rows, dy.cols);
            const double c = 1.0 - cache.clamp->value;
            for (std::size_t i = 0; i < carry.data.size(); ++i) carry.data[i] = c * dy.data[i];
            out.dx = add(carry, dx_h);
        }
        return out;
    }

    const Matrix dt = hadamard(sub(cache.h, cache.x), dy);
    // sigmoid' from the cached post-activation gate values
    const Matrix dz_t = hadamard(dt, activation_grad(Activation::sigmoid, cache.t));
    out.grads.dw_t = matmul_tn(cache.x, dz_t);
    out.grads.db_t = col_sum(dz_t);
    const Matrix dx_t = matmul(dz_t, transpose(layer.w_t));

    // Accumulation order is fixed: carry, then the H path, then the T path.
    Matrix dx(dy.rows, dy.cols);
    for (std::size_t i = 0; i < dx.data.size(); ++i)
        dx.data[i] = (1.0 - cache.t.data[i]) * dy.data[i];
    dx = add(add(dx, dx_h), dx_t);
    out.dx = std::move(dx);
    return out;
}

Matrix softmax(const Matrix& logits) {
    Matrix probs(logits.rows, logits.cols);
    for (std::size_t i = 0; i < logits.rows; ++i) {
        const double* zi = logits.row_ptr(i);
        double* pi = probs.row_ptr(i);
        double mx = zi[0];
        for (std::size_t j = 1; j < logits.cols; ++j) mx = std::max(mx, zi[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < logits.cols; ++j) {
            pi[j] = std::exp(zi[j] - mx);
            sum += pi[j];
        }
        for (std::size_t j = 0; j < logits.cols; ++j) pi[j] /= sum;
    }
    return probs;
}

SoftmaxXent softmax_xent(const Matrix& logits, const std::vector<int>& labels) {
    if (labels.size() != logits.rows) {
        throw ShapeError("softmax_xent: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(logits.rows) + " rows");
    }
    const std::size_t n = logits.rows, k = logits.cols;
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= k) {
            throw UsageError("softmax_xent: label " + std::to_string(labels[i]) + " at row " +
                             std::to_string(i) + " outside [0, " + std::to_string(k) + ")");
        }
    }
    SoftmaxXent out;
    out.probs = softmax(logits);
    out.sample_nll.resize(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out.sample_nll[i] = -std::log(out.probs(i, static_cast<std::size_t>(labels[i])));
        total += out.sample_nll[i];
    }
    out.loss = total / static_cast<double>(n);
    out.dlogits = Matrix(n, k);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* pi = out.probs.row_ptr(i);
        double* di = out.dlogits.row_ptr(i);
        for (std::size_t j = 0; j < k; ++j) di[j] = pi[j] * inv_n;
        di[static_cast<std::size_t>(labels[i])] -= inv_n;
    }
    return out;
}

Activation Network::body_act() const {
    if (body_kind == LayerKind::plain)
        return plain_body.empty() ? first.act : plain_body.front().act;
    return highway_body.empty() ? first.act : highway_body.front().act;
}

Architecture Network::architecture() const {
    Architecture a;
    a.input_dim = input_dim();
    a.width = width();
    a.classes = classes();
    a.body_layers = body_size();
    a.kind = body_kind;
    a.act = body_act();
    return a;
}

ForwardTrace network_trace(const Network& net, const Matrix& x,
                           std::optional<std::size_t> lesion) {
    if (lesion) {
        if (net.body_kind != LayerKind::highway) {
            throw UsageError("lesioning requires a highway body; this body is plain");
        }
        if (*lesion >= net.highway_body.size()) {
            throw UsageError("lesion layer " + std::to_string(*lesion) + " out of range [0, " +
                             std::to_string(net.highway_body.size()) + ")");
        }
    }
    ForwardTrace trace;
    auto fr = plain_forward(net.first, x);
    trace.first = std::move(fr.cache);
    const Matrix* cur = &trace.first.y;
    if (net.body_kind == LayerKind::plain) {
        trace.plain_body.reserve(net.plain_body.size());
        for (const auto& layer : net.plain_body) {
            auto r = plain_forward(layer, *cur);
            trace.plain_body.push_back(std::move(r.cache));
            cur = &trace.plain_body.back().y;
        }
    } else {
        trace.highway_body.reserve(net.highway_body.size());
        for (std::size_t l = 0; l < net.highway_body.size(); ++l) {
            std::optional<GateClamp> clamp;
            if (lesion && *lesion == l) clamp = GateClamp{0.0};
            auto r = highway_forward(net.highway_body[l], *cur, clamp);
            trace.highway_body.push_back(std::move(r.cache));
            cur = &trace.highway_body.back().y;
        }
    }
    auto orr = plain_forward(net.output, *cur);
    trace.output = std::move(orr.cache);
    trace.probs = softmax(trace.output.y);
    return trace;
}

std::size_t correct_count(const Matrix& probs, const std::vector<int>& labels) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < probs.rows; ++i) {
        const double* pi = probs.row_ptr(i);
        std::size_t best = 0;
        for (std::size_t j = 1; j < probs.cols; ++j)
            if (pi[j] > pi[best]) best = j;
        if (static_cast<int>(best) == labels[i]) ++correct;
    }
    return correct;
}

double accuracy_of(const Matrix& probs, const std::vector<int>& labels) {
    return static_cast<double>(correct_count(probs, labels)) /
           static_cast<double>(probs.rows);
}

NetworkForward network_forward(const Network& net, const Matrix& x,
                               const std::vector<int>& labels) {
    NetworkForward out;
    out.trace = network_trace(net, x);
    auto sm = softmax_xent(out.trace.output.y, labels);
    out.trace.probs = std::move(sm.probs);
    out.loss = sm.loss;
    out.sample_nll = std::move(sm.sample_nll);
    out.accuracy = accuracy_of(out.trace.probs, labels);
    return out;
}

namespace {

void check_trace(const Network& net, const ForwardTrace& trace) {
    const bool plain = net.body_kind == LayerKind::plain;
    if ((plain && trace.plain_body.size() != net.plain_body.size()) ||
        (!plain && trace.highway_body.size() != net.highway_body.size())) {
        throw UsageError("network_backward: trace body does not match network body");
    }
    if (trace.first.x.cols != net.input_dim() || trace.output.y.cols != net.classes()) {
        throw UsageError("network_backward: trace dimensions do not match network");
    }
}

} // namespace

NetworkGrads network_backward(const Network& net, const ForwardTrace& trace,
                              const std::vector<int>& labels) {
    check_trace(net, trace);
    if (labels.size() != trace.probs.rows) {
        throw UsageError("network_backward: label count does not match trace batch");
    }
    NetworkGrads grads;
    // dlogits = (probs - onehot) / batch, from the trace's probabilities
    const std::size_t n = trace.probs.rows, k = trace.probs.cols;
    Matrix dlogits(n, k);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* pi = trace.probs.row_ptr(i);
        double* di = dlogits.row_ptr(i);
        for (std::size_t j = 0; j < k; ++j) di[j] = pi[j] * inv_n;
        const int lab = labels[i];
        if (lab < 0 || static_cast<std::size_t>(lab) >= k) {
            throw UsageError("network_backward: label " + std::to_string(lab) + " outside [0, " +
                             std::to_string(k) + ")");
        }
        di[static_cast<std::size_t>(lab)] -= inv_n;
    }

    auto ob = plain_backward(net.output, trace.output, dlogits);
    grads.output = std::move(ob.grads);
    Matrix dcur = std::move(ob.dx);

    if (net.body_kind == LayerKind::plain) {
        grads.plain_body.resize(net.plain_body.size());
        for (std::size_t l = net.plain_body.size(); l-- > 0;) {
            auto b = plain_backward(net.plain_body[l], trace.plain_body[l], dcur);
            grads.plain_body[l] = std::move(b.grads);
            dcur = std::move(b.dx);
        }
    } else {
        grads.highway_body.resize(net.highway_body.size());
        for (std::size_t l = net.highway_body.size(); l-- > 0;) {
            auto b = highway_backward(net.highway_body[l], trace.highway_body[l], dcur);
            grads.highway_body[l] = std::move(b.grads);
            dcur = std::move(b.dx);
        }
    }

    auto fb = plain_backward(net.first, trace.first, dcur);
    grads.first = std::move(fb.grads);
    grads.dx = std::move(fb.dx);
    return grads;
}

EvalOut lesioned_forward(const Network& net, const Matrix& x, const std::vector<int>& labels,
                         std::size_t lesion_layer) {
    ForwardTrace trace = network_trace(net, x, lesion_layer);
    auto sm = softmax_xent(trace.output.y, labels);
    EvalOut out;
    out.loss = sm.loss;
    out.accuracy = accuracy_of(sm.probs, labels);
    return out;
}

ParamCount param_count(const Network& net) {
    auto plain_params = [](const PlainLayer& l) { return l.w_h.size() + l.b_h.size(); };
    ParamCount pc;
    pc.first = plain_params(net.first);
    if (net.body_kind == LayerKind::plain) {
        for (const auto& l : net.plain_body) pc.body.push_back(plain_params(l));
    } else {
        for (const auto& l : net.highway_body)
            pc.body.push_back(l.w_h.size() + l.b_h.size() + l.w_t.size() + l.b_t.size());
    }
    pc.output = plain_params(net.output);
    pc.total = pc.first + pc.output;
    for (auto b : pc.body) pc.total += b;
    return pc;
}

} // namespace hwy
