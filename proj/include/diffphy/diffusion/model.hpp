#pragma once

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <vector>

#include "diffphy/diffusion/schedule.hpp"
#include "diffphy/errors.hpp"
#include "diffphy/nn/adam.hpp"
#include "diffphy/nn/mlp.hpp"
#include "diffphy/nn/time_embedding.hpp"
#include "diffphy/parallel.hpp"
#include "diffphy/rng.hpp"

namespace diffphy::diffusion {

/// Noise-prediction model: variance schedule plus a time-conditioned MLP
/// mapping a noisy data vector (and timestep embedding) to the estimated
/// noise component.
struct DiffusionModel {
    VarianceSchedule schedule;
    nn::Mlp denoiser;
    int data_dim = 2;
    nn::TimeEmbedding embedding;

    void validate() const {
        schedule.validate();
        if (denoiser.input_dim() != data_dim || denoiser.output_dim() != data_dim)
            throw DimensionError("DiffusionModel: denoiser width != data_dim");
        if (denoiser.embed_dim != embedding.dim)
            throw DimensionError("DiffusionModel: denoiser embed_dim != embedding dim");
        if (embedding.max_timestep != schedule.steps)
            throw DimensionError("DiffusionModel: embedding max_timestep != schedule steps");
    }
};

/// Builds a freshly initialized model with the standard 3 x 128 Softplus
/// denoiser unless other sizes are requested.
inline DiffusionModel make_diffusion_model(VarianceSchedule schedule, std::uint64_t seed,
                                           int data_dim = 2, int hidden_width = 128,
                                           int n_hidden = 3, int embed_dim = 128) {
    DiffusionModel model;
    model.schedule = std::move(schedule);
    model.data_dim = data_dim;
    std::vector<int> dims;
    dims.push_back(data_dim);
    for (int i = 0; i < n_hidden; ++i) dims.push_back(hidden_width);
    dims.push_back(data_dim);
    model.denoiser = nn::init_weights(dims, seed, nn::HiddenActivation::Softplus,
                                      nn::OutputActivation::Linear, embed_dim);
    model.embedding = nn::TimeEmbedding(embed_dim, model.schedule.steps);
    model.validate();
    return model;
}

/// All timestep embeddings as columns 1..T (column 0 is the t = 0 baseline).
inline Eigen::MatrixXd embedding_table(const DiffusionModel& model) {
    Eigen::MatrixXd table(model.embedding.dim, model.schedule.steps + 1);
    for (int t = 0; t <= model.schedule.steps; ++t)
        table.col(t) = nn::sinusoidal_embed(t, model.embedding);
    return table;
}

/// Denoiser output for a batch sharing one timestep.
inline Eigen::MatrixXd predict_noise(const DiffusionModel& model, const Eigen::MatrixXd& x, int t) {
    model.schedule.check_step(t);
    const Eigen::MatrixXd e = nn::sinusoidal_embed(t, model.embedding);
    return nn::forward(model.denoiser, x, &e);
}

/// Closed-form jump to step t: x_t = sqrt(abar_t) x0 + sqrt(1 - abar_t) eps.
inline Eigen::VectorXd forward_diffuse(const Eigen::VectorXd& x0, int t,
                                       const Eigen::VectorXd& eps, const VarianceSchedule& sched) {
    if (x0.size() != eps.size()) throw DimensionError("forward_diffuse: x0/eps size mismatch");
    const double ab = sched.alpha_bar_at(t);
    return std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * eps;
}

/// Batch variant with a per-column timestep.
inline Eigen::MatrixXd forward_diffuse_batch(const Eigen::MatrixXd& x0, const std::vector<int>& ts,
                                             const Eigen::MatrixXd& eps,
                                             const VarianceSchedule& sched) {
    if (x0.rows() != eps.rows() || x0.cols() != eps.cols() ||
        static_cast<Eigen::Index>(ts.size()) != x0.cols())
        throw DimensionError("forward_diffuse_batch: shape mismatch");
    Eigen::MatrixXd out(x0.rows(), x0.cols());
    for (Eigen::Index c = 0; c < x0.cols(); ++c) {
        const double ab = sched.alpha_bar_at(ts[c]);
        out.col(c) = std::sqrt(ab) * x0.col(c) + std::sqrt(1.0 - ab) * eps.col(c);
    }
    return out;
}

struct NoiseLoss {
    double loss = 0.0;
    Eigen::MatrixXd pred_grad;  // dLoss/dPrediction
};

/// MSE between true and predicted noise, averaged over the batch:
/// loss = (1/B) sum_b ||eps_b - pred_b||^2.
inline NoiseLoss noise_prediction_loss(const Eigen::MatrixXd& eps_true,
                                       const Eigen::MatrixXd& eps_pred) {
    if (eps_true.rows() != eps_pred.rows() || eps_true.cols() != eps_pred.cols())
        throw DimensionError("noise_prediction_loss: shape mismatch");
    if (eps_true.cols() == 0) throw DomainError("noise_prediction_loss: empty batch");
    NoiseLoss out;
    const Eigen::MatrixXd diff = eps_pred - eps_true;
    const double b = static_cast<double>(eps_true.cols());
    out.loss = diff.squaredNorm() / b;
    out.pred_grad = (2.0 / b) * diff;
    return out;
}

struct LossAndGrad {
    double loss = 0.0;
    nn::MlpGrads grads;
};

/// Deterministic inner loss: given the sampled (t, eps) pairs, diffuse,
/// predict, and backpropagate the noise-prediction MSE.
inline LossAndGrad training_loss_on(const DiffusionModel& model, const Eigen::MatrixXd& x0,
                                    const std::vector<int>& ts, const Eigen::MatrixXd& eps) {
    const Eigen::MatrixXd xt = forward_diffuse_batch(x0, ts, eps, model.schedule);
    Eigen::MatrixXd embeds(model.embedding.dim, xt.cols());
    const Eigen::MatrixXd table = embedding_table(model);
    for (Eigen::Index c = 0; c < xt.cols(); ++c) embeds.col(c) = table.col(ts[c]);

    nn::ForwardCache cache;
    const Eigen::MatrixXd pred = nn::forward(model.denoiser, xt, &embeds, &cache);
    const NoiseLoss nl = noise_prediction_loss(eps, pred);
    LossAndGrad out;
    out.loss = nl.loss;
    out.grads = nn::backward(model.denoiser, cache, nl.pred_grad).grads;
    return out;
}

/// Noise-prediction training objective: per sample draw t ~ U{1..T} and
/// eps ~ N(0, I), then MSE between eps and the denoiser's estimate.
inline LossAndGrad training_loss(const DiffusionModel& model, const Eigen::MatrixXd& x0, Rng& rng) {
    if (x0.cols() == 0) throw DomainError("training_loss: empty batch");
    if (x0.rows() != model.data_dim) throw DimensionError("training_loss: batch width != data_dim");
    std::uniform_int_distribution<int> step_dist(1, model.schedule.steps);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<int> ts(x0.cols());
    Eigen::MatrixXd eps(x0.rows(), x0.cols());
    for (Eigen::Index c = 0; c < x0.cols(); ++c) {
        ts[c] = step_dist(rng);
        for (Eigen::Index r = 0; r < x0.rows(); ++r) eps(r, c) = normal(rng);
    }
    return training_loss_on(model, x0, ts, eps);
}

/// One ancestral reverse step given an externally supplied noise estimate:
///   x_{t-1} = (x_t - beta_t/sqrt(1-abar_t) * eps_hat) / sqrt(alpha_t) + sigma_t z
/// sigma_1 = 0, and z is ignored at t = 1.
inline Eigen::VectorXd reverse_step_from_eps(const Eigen::VectorXd& x_t, int t,
                                             const Eigen::VectorXd& eps_hat,
                                             const Eigen::VectorXd& z,
                                             const VarianceSchedule& sched) {
    sched.check_step(t);
    const double coef = sched.beta_at(t) / std::sqrt(1.0 - sched.alpha_bar_at(t));
    Eigen::VectorXd out = (x_t - coef * eps_hat) / std::sqrt(sched.alpha_at(t));
    if (t > 1) out += std::sqrt(sched.posterior_variance(t)) * z;
    return out;
}

/// Reverse step using the model's own noise prediction.
inline Eigen::VectorXd reverse_step(const DiffusionModel& model, const Eigen::VectorXd& x_t, int t,
                                    const Eigen::VectorXd& z) {
    const Eigen::MatrixXd eps = predict_noise(model, x_t, t);
    return reverse_step_from_eps(x_t, t, eps.col(0), z, model.schedule);
}

namespace detail {

/// Runs the reverse chain t_start..1 in place over a batch. z is drawn per
/// step for every sample (column-major within the batch), except at t = 1.
inline void reverse_chain(const DiffusionModel& model, Eigen::MatrixXd& x, int t_start, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int t = t_start; t >= 1; --t) {
        const Eigen::MatrixXd eps = predict_noise(model, x, t);
        const double coef = model.schedule.beta_at(t) / std::sqrt(1.0 - model.schedule.alpha_bar_at(t));
        x = (x - coef * eps) / std::sqrt(model.schedule.alpha_at(t));
        if (t > 1) {
            const double sigma = std::sqrt(model.schedule.posterior_variance(t));
            for (Eigen::Index c = 0; c < x.cols(); ++c)
                for (Eigen::Index r = 0; r < x.rows(); ++r) x(r, c) += sigma * normal(rng);
        }
    }
}

}  // namespace detail

/// Draws n samples by ancestral sampling from pure noise. Deterministic
/// given the rng state.
inline Eigen::MatrixXd sample(const DiffusionModel& model, int n, Rng& rng) {
    if (n <= 0) throw DomainError("sample: n must be positive");
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd x(model.data_dim, n);
    for (Eigen::Index c = 0; c < x.cols(); ++c)
        for (Eigen::Index r = 0; r < x.rows(); ++r) x(r, c) = normal(rng);
    detail::reverse_chain(model, x, model.schedule.steps, rng);
    return x;
}

/// Step whose per-step SNR is closest to snr_db; ties break toward the
/// larger step (more denoising).
inline int snr_to_timestep(double snr_db, const VarianceSchedule& sched) {
    int best_t = 1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int t = 1; t <= sched.steps; ++t) {
        const double d = std::abs(sched.snr_db_at(t) - snr_db);
        if (d <= best_d) {
            best_d = d;
            best_t = t;
        }
    }
    return best_t;
}

/// Chain entry step for a received observation y = x0 + n at the given
/// SNR. The per-coordinate noise-to-signal ratio of x_t is
/// 2(1-abar)/abar (x0 carries 1/2 per coordinate, eps carries 1), while y
/// carries sigma^2: matching them lands 3.01 dB above the per-step SNR
/// scale used by snr_to_timestep.
inline int observation_entry_step(double snr_db, const VarianceSchedule& sched) {
    return snr_to_timestep(snr_db + 10.0 * std::log10(2.0), sched);
}

/// Rescale factor for the chain entry: with t* from observation_entry_step,
/// sqrt(abar_{t*}) * y has signal coefficient sqrt(abar_{t*}) and
/// per-coordinate noise variance abar * sigma^2 / 2 = 1 - abar, i.e.
/// exactly the marginal of x_{t*}.
inline double observation_scale(int t_star, const VarianceSchedule& sched) {
    return std::sqrt(sched.alpha_bar_at(t_star));
}

/// SNR-aligned partial denoising: map the received vector onto the chain
/// at the SNR-matched entry step, then run the reverse process down to 1.
inline Eigen::VectorXd denoise_observation(const DiffusionModel& model, const Eigen::VectorXd& y,
                                           double snr_db, Rng& rng) {
    if (!y.allFinite()) throw NumericError("denoise_observation: non-finite input");
    if (y.size() != model.data_dim) throw DimensionError("denoise_observation: width != data_dim");
    const int t_star = observation_entry_step(snr_db, model.schedule);
    Eigen::MatrixXd x = observation_scale(t_star, model.schedule) * y;
    detail::reverse_chain(model, x, t_star, rng);
    return x.col(0);
}

/// Batched denoising, partitioned for parallel execution. Each fixed
/// partition owns an RNG stream derived from (seed, partition), so the
/// result is independent of thread scheduling.
inline Eigen::MatrixXd denoise_batch(const DiffusionModel& model, const Eigen::MatrixXd& y,
                                     double snr_db, std::uint64_t seed) {
    if (!y.allFinite()) throw NumericError("denoise_batch: non-finite input");
    if (y.rows() != model.data_dim) throw DimensionError("denoise_batch: width != data_dim");
    const int t_star = observation_entry_step(snr_db, model.schedule);
    const double scale = observation_scale(t_star, model.schedule);
    Eigen::MatrixXd out(y.rows(), y.cols());
    parallel_partitions([&](std::size_t p) {
        const auto [lo, hi] = partition_range(static_cast<std::size_t>(y.cols()), p);
        if (lo == hi) return;
        Rng rng(derive_seed(seed, {p}));
        Eigen::MatrixXd x = scale * y.middleCols(lo, hi - lo);
        detail::reverse_chain(model, x, t_star, rng);
        out.middleCols(lo, hi - lo) = x;
    });
    return out;
}

}  // namespace diffphy::diffusion
