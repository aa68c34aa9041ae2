#pragma once

#include <Eigen/Core>
#include <cmath>

#include "diffphy/errors.hpp"
#include "diffphy/nn/mlp.hpp"

namespace diffphy::nn {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Adam moments for one Mlp. Moment tensors are allocated lazily on the
/// first step so a fresh state can be declared before the net exists.
struct AdamState {
    AdamConfig config;
    long step_count = 0;
    MlpGrads first_moment;
    MlpGrads second_moment;
};

/// One Adam update on a single tensor; `step` is the 1-based step index
/// used for bias correction.
template <typename Derived, typename GDerived>
void adam_update(Eigen::MatrixBase<Derived>& param, const Eigen::MatrixBase<GDerived>& grad,
                 Eigen::MatrixBase<Derived>& m, Eigen::MatrixBase<Derived>& v,
                 const AdamConfig& cfg, long step) {
    if (param.rows() != grad.rows() || param.cols() != grad.cols())
        throw DimensionError("adam_update: param/grad shape mismatch");
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
    v = cfg.beta2 * v.derived() + (1.0 - cfg.beta2) * grad.derived().array().square().matrix();
    const double mc = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
    const double vc = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
    param.derived().array() -=
        cfg.learning_rate * (m.derived().array() / mc) /
        ((v.derived().array() / vc).sqrt() + cfg.epsilon);
}

/// Adam step over every parameter of the net. Throws DimensionError on
/// any shape mismatch and NumericError if an update produces non-finite
/// parameters.
inline void adam_step(Mlp& net, const MlpGrads& grads, AdamState& state) {
    if (state.step_count == 0 && state.first_moment.weights.empty()) {
        state.first_moment = MlpGrads::zeros_like(net);
        state.second_moment = MlpGrads::zeros_like(net);
    }
    if (grads.weights.size() != net.weights.size() ||
        grads.biases.size() != net.biases.size() ||
        grads.cond_proj.size() != net.cond_proj.size() ||
        state.first_moment.weights.size() != net.weights.size())
        throw DimensionError("adam_step: gradient/state structure mismatch");

    state.step_count += 1;
    const long t = state.step_count;
    for (std::size_t i = 0; i < net.weights.size(); ++i)
        adam_update(net.weights[i], grads.weights[i], state.first_moment.weights[i],
                    state.second_moment.weights[i], state.config, t);
    for (std::size_t i = 0; i < net.biases.size(); ++i)
        adam_update(net.biases[i], grads.biases[i], state.first_moment.biases[i],
                    state.second_moment.biases[i], state.config, t);
    for (std::size_t i = 0; i < net.cond_proj.size(); ++i)
        adam_update(net.cond_proj[i], grads.cond_proj[i], state.first_moment.cond_proj[i],
                    state.second_moment.cond_proj[i], state.config, t);
    if (!net.params_finite()) throw NumericError("adam_step: non-finite parameters after update");
}

}  // namespace diffphy::nn
