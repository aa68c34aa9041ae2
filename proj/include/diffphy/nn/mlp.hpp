#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "diffphy/errors.hpp"
#include "diffphy/nn/activations.hpp"
#include "diffphy/rng.hpp"

namespace diffphy::nn {

/// Fixed-topology multilayer perceptron. Batches are column-major: one
/// sample per column. When embed_dim > 0 every hidden layer carries an
/// extra projection matrix and the conditioning vector enters additively
/// on the pre-activation:
///
///   z_l = W_l a_{l-1} + b_l + P_l e
struct Mlp {
    std::vector<int> layer_dims;               // input, hidden..., output
    std::vector<Eigen::MatrixXd> weights;      // weights[l]: dims[l+1] x dims[l]
    std::vector<Eigen::VectorXd> biases;       // biases[l]: dims[l+1]
    std::vector<Eigen::MatrixXd> cond_proj;    // per hidden layer: dims[l+1] x embed_dim
    HiddenActivation hidden_activation = HiddenActivation::Softplus;
    OutputActivation output_activation = OutputActivation::Linear;
    int embed_dim = 0;                         // 0 = unconditioned

    int n_layers() const { return static_cast<int>(layer_dims.size()) - 1; }
    int n_hidden() const { return n_layers() - 1; }
    int input_dim() const { return layer_dims.front(); }
    int output_dim() const { return layer_dims.back(); }
    bool conditioned() const { return embed_dim > 0; }

    bool params_finite() const {
        for (const auto& w : weights)
            if (!w.allFinite()) return false;
        for (const auto& b : biases)
            if (!b.allFinite()) return false;
        for (const auto& p : cond_proj)
            if (!p.allFinite()) return false;
        return true;
    }
};

/// Gradient (or moment) container shaped exactly like an Mlp's parameters.
struct MlpGrads {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
    std::vector<Eigen::MatrixXd> cond_proj;

    static MlpGrads zeros_like(const Mlp& net) {
        MlpGrads g;
        for (const auto& w : net.weights) g.weights.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
        for (const auto& b : net.biases) g.biases.push_back(Eigen::VectorXd::Zero(b.size()));
        for (const auto& p : net.cond_proj) g.cond_proj.push_back(Eigen::MatrixXd::Zero(p.rows(), p.cols()));
        return g;
    }

    void add_scaled(const MlpGrads& other, double scale) {
        for (std::size_t i = 0; i < weights.size(); ++i) weights[i] += scale * other.weights[i];
        for (std::size_t i = 0; i < biases.size(); ++i) biases[i] += scale * other.biases[i];
        for (std::size_t i = 0; i < cond_proj.size(); ++i) cond_proj[i] += scale * other.cond_proj[i];
    }
};

/// Activations recorded by forward() for the matching backward() call.
struct ForwardCache {
    std::vector<int> layer_dims;
    int embed_dim = 0;
    Eigen::MatrixXd input;
    Eigen::MatrixXd t_embed;                // 0x0 when unconditioned
    std::vector<Eigen::MatrixXd> pre_acts;  // per hidden layer
    std::vector<Eigen::MatrixXd> acts;      // per hidden layer
    Eigen::MatrixXd output;                 // post output activation
};

namespace detail {

// Vectorized activation maps (Eigen packet math); the scalar forms live
// in activations.hpp.
inline void apply_hidden(HiddenActivation act, const Eigen::MatrixXd& z, Eigen::MatrixXd& a) {
    if (act == HiddenActivation::Softplus)
        a = ((1.0 + (-z.array().abs()).exp()).log() + z.array().max(0.0)).matrix();
    else
        a = z.cwiseMax(0.0);
}

inline Eigen::MatrixXd hidden_grad(HiddenActivation act, const Eigen::MatrixXd& z) {
    if (act == HiddenActivation::Softplus)
        return (1.0 / (1.0 + (-z.array()).exp())).matrix();
    return (z.array() > 0.0).cast<double>().matrix();
}

inline void softmax_columns(Eigen::MatrixXd& z) {
    for (Eigen::Index c = 0; c < z.cols(); ++c) {
        auto col = z.col(c);
        col.array() -= col.maxCoeff();
        col = col.array().exp();
        col /= col.sum();
    }
}

}  // namespace detail

/// Forward pass over a batch (one sample per column). `t_embed` must be
/// null iff the net is unconditioned; it may have either one column
/// (shared timestep, broadcast across the batch) or one per sample.
/// Pass `cache` to record activations for backward().
inline Eigen::MatrixXd forward(const Mlp& net, const Eigen::MatrixXd& input,
                               const Eigen::MatrixXd* t_embed = nullptr,
                               ForwardCache* cache = nullptr) {
    if (input.rows() != net.input_dim())
        throw DimensionError("forward: input width " + std::to_string(input.rows()) +
                             " != layer_dims[0] = " + std::to_string(net.input_dim()));
    if (net.conditioned() != (t_embed != nullptr))
        throw DimensionError(net.conditioned() ? "forward: conditioned net requires t_embed"
                                               : "forward: t_embed passed to unconditioned net");
    if (t_embed != nullptr) {
        if (t_embed->rows() != net.embed_dim)
            throw DimensionError("forward: t_embed width " + std::to_string(t_embed->rows()) +
                                 " != embed_dim = " + std::to_string(net.embed_dim));
        if (t_embed->cols() != 1 && t_embed->cols() != input.cols())
            throw DimensionError("forward: t_embed batch size mismatch");
        if (!t_embed->allFinite()) throw NumericError("forward: non-finite t_embed");
    }
    if (!input.allFinite()) throw NumericError("forward: non-finite input");

    if (cache != nullptr) {
        cache->layer_dims = net.layer_dims;
        cache->embed_dim = net.embed_dim;
        cache->input = input;
        cache->t_embed = (t_embed != nullptr) ? *t_embed : Eigen::MatrixXd();
        cache->pre_acts.clear();
        cache->acts.clear();
    }

    Eigen::MatrixXd a = input;
    Eigen::MatrixXd z;
    for (int l = 0; l < net.n_hidden(); ++l) {
        z.noalias() = net.weights[l] * a;
        z.colwise() += net.biases[l];
        if (net.conditioned()) {
            if (t_embed->cols() == 1) {
                z.colwise() += (net.cond_proj[l] * t_embed->col(0)).eval();
            } else {
                z.noalias() += net.cond_proj[l] * (*t_embed);
            }
        }
        detail::apply_hidden(net.hidden_activation, z, a);
        if (cache != nullptr) {
            cache->pre_acts.push_back(z);
            cache->acts.push_back(a);
        }
    }
    Eigen::MatrixXd out;
    out.noalias() = net.weights[net.n_layers() - 1] * a;
    out.colwise() += net.biases[net.n_layers() - 1];
    if (net.output_activation == OutputActivation::Softmax) detail::softmax_columns(out);
    if (cache != nullptr) cache->output = out;
    return out;
}

struct BackwardResult {
    MlpGrads grads;
    Eigen::MatrixXd input_grad;
};

/// Exact gradients of the scalar loss whose output-gradient is supplied,
/// for every weight, bias and conditioning projection, plus the gradient
/// with respect to the input batch.
inline BackwardResult backward(const Mlp& net, const ForwardCache& cache,
                               const Eigen::MatrixXd& output_grad) {
    if (cache.layer_dims != net.layer_dims || cache.embed_dim != net.embed_dim)
        throw StateError("backward: cache was produced by a different net topology");
    if (static_cast<int>(cache.acts.size()) != net.n_hidden())
        throw StateError("backward: incomplete cache");
    if (output_grad.rows() != net.output_dim() || output_grad.cols() != cache.input.cols())
        throw DimensionError("backward: output_grad shape mismatch");

    BackwardResult result;
    result.grads.weights.resize(net.weights.size());
    result.grads.biases.resize(net.biases.size());
    result.grads.cond_proj.resize(net.cond_proj.size());

    Eigen::MatrixXd dz;
    if (net.output_activation == OutputActivation::Softmax) {
        dz.resizeLike(output_grad);
        for (Eigen::Index c = 0; c < output_grad.cols(); ++c) {
            const auto s = cache.output.col(c);
            const auto g = output_grad.col(c);
            dz.col(c) = s.cwiseProduct(g) - s * g.dot(s);
        }
    } else {
        dz = output_grad;
    }

    const bool shared_embed = net.conditioned() && cache.t_embed.cols() == 1;
    for (int l = net.n_layers() - 1; l >= 0; --l) {
        const Eigen::MatrixXd& below = (l == 0) ? cache.input : cache.acts[l - 1];
        result.grads.weights[l].noalias() = dz * below.transpose();
        result.grads.biases[l] = dz.rowwise().sum();
        if (l < net.n_hidden() && net.conditioned()) {
            if (shared_embed)
                result.grads.cond_proj[l].noalias() =
                    dz.rowwise().sum() * cache.t_embed.col(0).transpose();
            else
                result.grads.cond_proj[l].noalias() = dz * cache.t_embed.transpose();
        }
        Eigen::MatrixXd da = net.weights[l].transpose() * dz;
        if (l == 0) {
            result.input_grad = std::move(da);
        } else {
            dz = da.cwiseProduct(detail::hidden_grad(net.hidden_activation, cache.pre_acts[l - 1]));
        }
    }
    return result;
}

/// Fan-in scaled normal initialization (gain 2, matching ReLU/Softplus),
/// zero biases. Deterministic given the seed.
inline Mlp init_weights(const std::vector<int>& layer_dims, std::uint64_t seed,
                        HiddenActivation hidden = HiddenActivation::Softplus,
                        OutputActivation output = OutputActivation::Linear, int embed_dim = 0) {
    if (layer_dims.size() < 2) throw DomainError("init_weights: need at least 2 layer dims");
    for (int d : layer_dims)
        if (d <= 0) throw DomainError("init_weights: layer dims must be positive");
    if (embed_dim < 0) throw DomainError("init_weights: embed_dim must be non-negative");

    Mlp net;
    net.layer_dims = layer_dims;
    net.hidden_activation = hidden;
    net.output_activation = output;
    net.embed_dim = embed_dim;

    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int n_layers = static_cast<int>(layer_dims.size()) - 1;
    for (int l = 0; l < n_layers; ++l) {
        const int fan_in = layer_dims[l];
        const int fan_out = layer_dims[l + 1];
        Eigen::MatrixXd w(fan_out, fan_in);
        const double std_w = std::sqrt(2.0 / fan_in);
        for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = std_w * normal(rng);
        net.weights.push_back(std::move(w));
        net.biases.push_back(Eigen::VectorXd::Zero(fan_out));
        if (l < n_layers - 1 && embed_dim > 0) {
            Eigen::MatrixXd p(fan_out, embed_dim);
            const double std_p = std::sqrt(2.0 / embed_dim);
            for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = std_p * normal(rng);
            net.cond_proj.push_back(std::move(p));
        }
    }
    return net;
}

}  // namespace diffphy::nn
