#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <vector>

#include "diffphy/comms/constellation.hpp"
#include "diffphy/errors.hpp"
#include "diffphy/nn/adam.hpp"
#include "diffphy/nn/mlp.hpp"
#include "diffphy/rng.hpp"

namespace diffphy::pipelines {

/// Supervised benchmark demapper: a Softmax classifier over the M symbol
/// indices, fed (I, Q, snr_db/10) so one net covers the whole SNR range.
struct BaselineDnn {
    nn::Mlp net;
    double snr_min_db = -25.0;
    double snr_max_db = -5.0;

    int order() const { return net.output_dim(); }

    Eigen::MatrixXd inputs_for(const std::vector<comms::cdouble>& rx, double snr_db) const {
        Eigen::MatrixXd x(3, static_cast<Eigen::Index>(rx.size()));
        for (std::size_t i = 0; i < rx.size(); ++i) {
            x(0, i) = rx[i].real();
            x(1, i) = rx[i].imag();
            x(2, i) = snr_db / 10.0;
        }
        return x;
    }

    /// Class probabilities for one received sample.
    Eigen::VectorXd probabilities(comms::cdouble rx, double snr_db) const {
        const Eigen::MatrixXd out = nn::forward(net, inputs_for({rx}, snr_db));
        return out.col(0);
    }

    /// Argmax symbol decisions for a received block.
    std::vector<int> classify(const std::vector<comms::cdouble>& rx, double snr_db) const {
        const Eigen::MatrixXd out = nn::forward(net, inputs_for(rx, snr_db));
        std::vector<int> indices(rx.size());
        for (Eigen::Index c = 0; c < out.cols(); ++c) {
            Eigen::Index best;
            out.col(c).maxCoeff(&best);
            indices[static_cast<std::size_t>(c)] = static_cast<int>(best);
        }
        return indices;
    }
};

struct BaselineTrainHyper {
    long dataset_size = 200000;
    int batch_size = 256;
    int epochs = 20;
    nn::AdamConfig adam;
    int hidden_width = 128;
    int n_hidden = 3;
};

struct BaselineTrainResult {
    BaselineDnn dnn;
    std::vector<double> epoch_losses;
};

/// Trains the classifier with cross-entropy on symbols corrupted by AWGN
/// at SNRs drawn uniformly from [snr_min_db, snr_max_db].
inline BaselineTrainResult train_dnn_baseline(int m, double snr_min_db, double snr_max_db,
                                              std::uint64_t seed,
                                              const BaselineTrainHyper& hyper = {}) {
    if (snr_min_db > snr_max_db) throw DomainError("train_dnn_baseline: empty SNR range");
    if (hyper.dataset_size <= 0 || hyper.batch_size <= 0 || hyper.epochs <= 0)
        throw DomainError("train_dnn_baseline: non-positive training budget");
    const comms::Constellation constellation = comms::build_qam(m);

    BaselineTrainResult result;
    std::vector<int> dims{3};
    for (int i = 0; i < hyper.n_hidden; ++i) dims.push_back(hyper.hidden_width);
    dims.push_back(m);
    result.dnn.net = nn::init_weights(dims, seed, nn::HiddenActivation::Softplus,
                                      nn::OutputActivation::Softmax);
    result.dnn.snr_min_db = snr_min_db;
    result.dnn.snr_max_db = snr_max_db;

    Rng rng(derive_seed(seed, {0x6261736531ull}));
    std::uniform_int_distribution<int> symbol_dist(0, m - 1);
    std::uniform_real_distribution<double> snr_dist(snr_min_db, snr_max_db);
    std::normal_distribution<double> normal(0.0, 1.0);

    const long n = hyper.dataset_size;
    Eigen::MatrixXd inputs(3, n);
    std::vector<int> targets(n);
    for (long i = 0; i < n; ++i) {
        const int k = symbol_dist(rng);
        const double snr_db = snr_dist(rng);
        const double per_quad_std = std::sqrt(std::pow(10.0, -snr_db / 10.0) / 2.0);
        inputs(0, i) = constellation.points[k].real() + per_quad_std * normal(rng);
        inputs(1, i) = constellation.points[k].imag() + per_quad_std * normal(rng);
        inputs(2, i) = snr_db / 10.0;
        targets[i] = k;
    }

    nn::AdamState adam;
    adam.config = hyper.adam;
    std::vector<long> order(n);
    for (long i = 0; i < n; ++i) order[i] = i;

    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0.0;
        long seen = 0;
        for (long start = 0; start < n; start += hyper.batch_size) {
            const long b = std::min<long>(hyper.batch_size, n - start);
            Eigen::MatrixXd batch(3, b);
            std::vector<int> batch_targets(b);
            for (long i = 0; i < b; ++i) {
                batch.col(i) = inputs.col(order[start + i]);
                batch_targets[i] = targets[order[start + i]];
            }
            nn::ForwardCache cache;
            const Eigen::MatrixXd probs = nn::forward(result.dnn.net, batch, nullptr, &cache);

            // Mean cross-entropy; gradient w.r.t. the Softmax outputs.
            double batch_loss = 0.0;
            Eigen::MatrixXd output_grad = Eigen::MatrixXd::Zero(m, b);
            for (long i = 0; i < b; ++i) {
                const double p = std::max(probs(batch_targets[i], i), 1e-300);
                batch_loss -= std::log(p);
                output_grad(batch_targets[i], i) = -1.0 / (p * static_cast<double>(b));
            }
            batch_loss /= static_cast<double>(b);

            const auto back = nn::backward(result.dnn.net, cache, output_grad);
            nn::adam_step(result.dnn.net, back.grads, adam);
            loss_sum += batch_loss * static_cast<double>(b);
            seen += b;
        }
        const double epoch_loss = loss_sum / static_cast<double>(seen);
        if (!std::isfinite(epoch_loss))
            throw TrainingError("train_dnn_baseline: loss diverged", result.epoch_losses);
        result.epoch_losses.push_back(epoch_loss);
    }
    return result;
}

}  // namespace diffphy::pipelines
