#include "hwy/optim.hpp"

#include <cmath>

namespace hwy {

void LrSchedule::validate() const {
    if (kind == Kind::exponential) {
        if (!(factor > 0.0 && factor <= 1.0))
            throw ConfigError("lr schedule: exponential factor must be in (0, 1], got " +
                              std::to_string(factor));
        return;
    }
    if (!(gamma > 0.0 && gamma <= 1.0))
        throw ConfigError("lr schedule: step gamma must be in (0, 1], got " +
                          std::to_string(gamma));
    for (std::size_t i = 1; i < milestones.size(); ++i) {
        if (milestones[i] <= milestones[i - 1])
            throw ConfigError("lr schedule: milestones must be strictly increasing");
    }
}

double LrSchedule::at(double base_lr, int epoch) const {
    if (epoch < 0) throw UsageError("lr schedule: negative epoch");
    if (kind == Kind::exponential) {
        return base_lr * std::pow(factor, epoch);
    }
    int passed = 0;
    for (int m : milestones)
        if (m <= epoch) ++passed;
    return base_lr * std::pow(gamma, passed);
}

namespace {

NetworkGrads zero_like(const Network& net) {
    NetworkGrads g;
    g.first = {Matrix(net.first.w_h.rows, net.first.w_h.cols), Matrix(1, net.first.b_h.cols)};
    if (net.body_kind == LayerKind::plain) {
        for (const auto& l : net.plain_body)
            g.plain_body.push_back({Matrix(l.w_h.rows, l.w_h.cols), Matrix(1, l.b_h.cols)});
    } else {
        for (const auto& l : net.highway_body)
            g.highway_body.push_back({Matrix(l.w_h.rows, l.w_h.cols), Matrix(1, l.b_h.cols),
                                      Matrix(l.w_t.rows, l.w_t.cols), Matrix(1, l.b_t.cols)});
    }
    g.output = {Matrix(net.output.w_h.rows, net.output.w_h.cols), Matrix(1, net.output.b_h.cols)};
    return g;
}

void update_one(Matrix& param, Matrix& vel, const Matrix& grad, double mu, double lr,
                const std::string& where) {
    if (!param.same_shape(grad) || !param.same_shape(vel)) {
        throw ShapeError("sgd_step at " + where + ": parameter " + param.shape_str() +
                         ", gradient " + grad.shape_str());
    }
    double acc = 0.0;
    for (double v : grad.data) acc += std::abs(v);
    if (!std::isfinite(acc)) {
        throw NumericError("sgd_step: non-finite gradient in " + where);
    }
    for (std::size_t i = 0; i < param.data.size(); ++i) {
        vel.data[i] = mu * vel.data[i] - lr * grad.data[i];
        param.data[i] += vel.data[i];
    }
}

} // namespace

SgdMomentum::SgdMomentum(const Network& net, double base_lr, double momentum)
    : base_lr_(base_lr), momentum_(momentum), velocity_(zero_like(net)) {
    if (!(base_lr > 0.0)) throw ConfigError("sgd: learning rate must be positive");
    if (momentum < 0.0 || momentum >= 1.0)
        throw ConfigError("sgd: momentum must be in [0, 1), got " + std::to_string(momentum));
}

void SgdMomentum::step(Network& net, const NetworkGrads& grads, double lr) {
    update_one(net.first.w_h, velocity_.first.dw_h, grads.first.dw_h, momentum_, lr, "first.w_h");
    update_one(net.first.b_h, velocity_.first.db_h, grads.first.db_h, momentum_, lr, "first.b_h");
    if (net.body_kind == LayerKind::plain) {
        if (grads.plain_body.size() != net.plain_body.size())
            throw ShapeError("sgd_step: gradient body size mismatch");
        for (std::size_t l = 0; l < net.plain_body.size(); ++l) {
            const std::string where = "body[" + std::to_string(l) + "]";
            update_one(net.plain_body[l].w_h, velocity_.plain_body[l].dw_h,
                       grads.plain_body[l].dw_h, momentum_, lr, where + ".w_h");
            update_one(net.plain_body[l].b_h, velocity_.plain_body[l].db_h,
                       grads.plain_body[l].db_h, momentum_, lr, where + ".b_h");
        }
    } else {
        if (grads.highway_body.size() != net.highway_body.size())
            throw ShapeError("sgd_step: gradient body size mismatch");
        for (std::size_t l = 0; l < net.highway_body.size(); ++l) {
            const std::string where = "body[" + std::to_string(l) + "]";
            update_one(net.highway_body[l].w_h, velocity_.highway_body[l].dw_h,
                       grads.highway_body[l].dw_h, momentum_, lr, where + ".w_h");
            update_one(net.highway_body[l].b_h, velocity_.highway_body[l].db_h,
                       grads.highway_body[l].db_h, momentum_, lr, where + ".b_h");
            update_one(net.highway_body[l].w_t, velocity_.highway_body[l].dw_t,
                       grads.highway_body[l].dw_t, momentum_, lr, where + ".w_t");
            update_one(net.highway_body[l].b_t, velocity_.highway_body[l].db_t,
                       grads.highway_body[l].db_t, momentum_, lr, where + ".b_t");
        }
    }
    update_one(net.output.w_h, velocity_.output.dw_h, grads.output.dw_h, momentum_, lr,
               "output.w_h");
    update_one(net.output.b_h, velocity_.output.db_h, grads.output.db_h, momentum_, lr,
               "output.b_h");
}

} // namespace hwy
