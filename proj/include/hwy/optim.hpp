#pragma once

#include <vector>

#include "hwy/layers.hpp"

namespace hwy {

/// Per-epoch learning-rate decay: either a per-epoch exponential factor or a
/// stepped schedule that multiplies by gamma at each milestone epoch.
struct LrSchedule {
    enum class Kind { exponential, step };
    Kind kind = Kind::exponential;
    double factor = 1.0;          // exponential, in (0, 1]
    double gamma = 1.0;           // step, in (0, 1]
    std::vector<int> milestones;  // step, strictly increasing

    void validate() const;
    /// lr at a given epoch (epoch 0 returns base_lr untouched).
    double at(double base_lr, int epoch) const;
};

/// Classical heavy-ball SGD: v <- mu v - lr g; p <- p + v.
/// One optimizer owns one network's parameters; velocity mirrors them and
/// starts at zero.
class SgdMomentum {
public:
    SgdMomentum(const Network& net, double base_lr, double momentum);

    double base_lr() const { return base_lr_; }
    double momentum() const { return momentum_; }
    const NetworkGrads& velocity() const { return velocity_; }

    /// Applies one update in place. NaN/Inf gradients raise NumericError
    /// naming the offending layer.
    void step(Network& net, const NetworkGrads& grads, double lr);

private:
    double base_lr_;
    double momentum_;
    NetworkGrads velocity_;
};

} // namespace hwy
