#pragma once

#include <Eigen/Core>
#include <cmath>
#include <string>
#include <vector>

#include "diffphy/comms/channel.hpp"
#include "diffphy/comms/constellation.hpp"
#include "diffphy/comms/metrics.hpp"
#include "diffphy/diffusion/model.hpp"
#include "diffphy/errors.hpp"
#include "diffphy/io/checkpoint.hpp"
#include "diffphy/log.hpp"
#include "diffphy/pipelines/baseline.hpp"
#include "diffphy/pipelines/receiver.hpp"
#include "diffphy/rng.hpp"

namespace diffphy::pipelines {

/// Transmit probability over the M constellation points produced by the
/// DDPM shaping procedure at one link SNR.
struct ShapedDistribution {
    int order = 0;
    Eigen::VectorXd probs;
    double snr_db = 0.0;

    void validate() const {
        if (probs.size() != order) throw DimensionError("ShapedDistribution: size != order");
        if (probs.minCoeff() < 0.0) throw DomainError("ShapedDistribution: negative probability");
        if (std::abs(probs.sum() - 1.0) > 1e-9)
            throw DomainError("ShapedDistribution: probabilities do not sum to 1");
    }
};

/// Case study 2 shaping step: synthetically noise uniform symbols at the
/// link SNR, denoise them through the reverse process, and histogram which
/// constellation points the reconstructions land on.
inline ShapedDistribution shape_constellation(const diffusion::DiffusionModel& model,
                                              const comms::Constellation& constellation,
                                              double snr_db, long n_samples, std::uint64_t seed) {
    if (n_samples <= 0) throw DomainError("shape_constellation: n_samples must be positive");
    model.validate();

    Rng rng(derive_seed(seed, {0x7368617065ull}));
    std::uniform_int_distribution<int> symbol_dist(0, constellation.order - 1);
    comms::SymbolFrame frame;
    frame.tx_indices.resize(n_samples);
    frame.tx_symbols.resize(n_samples);
    for (long i = 0; i < n_samples; ++i) {
        frame.tx_indices[i] = symbol_dist(rng);
        frame.tx_symbols[i] = constellation.points[frame.tx_indices[i]];
    }
    const comms::ChannelModel synthetic{comms::ChannelKind::Awgn, snr_db, 0.0};
    comms::apply_channel(frame, synthetic, rng);

    const Eigen::MatrixXd denoised = diffusion::denoise_batch(
        model, detail::to_matrix(frame.rx_symbols), snr_db, derive_seed(seed, {0x64656eull}));

    Eigen::VectorXd histogram = Eigen::VectorXd::Zero(constellation.order);
    for (Eigen::Index c = 0; c < denoised.cols(); ++c)
        histogram[comms::nearest_index(comms::cdouble(denoised(0, c), denoised(1, c)),
                                       constellation)] += 1.0;

    ShapedDistribution dist;
    dist.order = constellation.order;
    dist.probs = histogram / histogram.sum();
    dist.snr_db = snr_db;
    dist.validate();
    return dist;
}

struct MiExperimentConfig {
    int m = 16;
    std::vector<double> snr_grid_db = {-25.0, -22.5, -20.0, -17.5, -15.0,
                                       -12.5, -10.0, -7.5, -5.0};
    long symbols_per_point = 100000;
    long shaping_samples = 20000;
    std::uint64_t master_seed = 1;
    std::vector<comms::ChannelKind> channels = {comms::ChannelKind::Awgn,
                                                comms::ChannelKind::Laplacian};

    void validate() const {
        if (snr_grid_db.empty()) throw DomainError("mi config: empty SNR grid");
        if (!std::is_sorted(snr_grid_db.begin(), snr_grid_db.end()))
            throw DomainError("mi config: SNR grid must be sorted");
        if (symbols_per_point <= 0 || shaping_samples <= 0)
            throw DomainError("mi config: empty budgets");
    }
};

struct MiCell {
    double snr_db = 0.0;
    comms::ChannelKind channel = comms::ChannelKind::Awgn;
    std::string arm;  // "ddpm-shaped" | "dnn-baseline"
    double mi_bits = 0.0;
    long n_symbols = 0;
    std::uint64_t seed = 0;
    std::string model_checksum;
};

/// Empirical joint (tx, decoded) counts for a source distribution,
/// channel, and decoder.
template <typename Decode>
comms::JointCounts joint_counts_for(const Eigen::VectorXd& source_probs,
                                    const comms::Constellation& constellation,
                                    const comms::ChannelModel& channel, long n_symbols,
                                    std::uint64_t seed, Decode&& decode) {
    Rng rng(seed);
    std::discrete_distribution<int> source(source_probs.data(),
                                           source_probs.data() + source_probs.size());
    comms::SymbolFrame frame;
    frame.tx_indices.resize(n_symbols);
    frame.tx_symbols.resize(n_symbols);
    for (long i = 0; i < n_symbols; ++i) {
        frame.tx_indices[i] = source(rng);
        frame.tx_symbols[i] = constellation.points[frame.tx_indices[i]];
    }
    comms::apply_channel(frame, channel, rng);
    const std::vector<int> decoded = decode(frame);
    comms::JointCounts counts =
        comms::JointCounts::Zero(constellation.order, constellation.order);
    for (long i = 0; i < n_symbols; ++i) counts(frame.tx_indices[i], decoded[i]) += 1;
    return counts;
}

/// Case study 2: symbol mutual information of the DDPM-shaped source with
/// a minimum-distance receiver vs a uniform source with the DNN demapper.
/// Shaping runs once per SNR (it only sees Gaussian synthetic noise) and
/// both channel rows reuse it, per the out-of-distribution protocol.
inline std::vector<MiCell> run_mi_sweep(const diffusion::DiffusionModel& model,
                                        const BaselineDnn& baseline,
                                        const MiExperimentConfig& cfg) {
    cfg.validate();
    model.validate();
    if (baseline.order() != cfg.m) throw StateError("run_mi_sweep: baseline order != configured m");
    const comms::Constellation constellation = comms::build_qam(cfg.m);
    const std::string ddpm_sum = io::model_checksum(model);
    const std::string dnn_sum = io::model_checksum(baseline);
    const Eigen::VectorXd uniform =
        Eigen::VectorXd::Constant(cfg.m, 1.0 / static_cast<double>(cfg.m));

    std::vector<MiCell> cells;
    for (double snr_db : cfg.snr_grid_db) {
        const std::uint64_t shape_seed = derive_seed(cfg.master_seed, {seed_tag(snr_db), 0x7368ull});
        const ShapedDistribution shaped =
            shape_constellation(model, constellation, snr_db, cfg.shaping_samples, shape_seed);
        for (comms::ChannelKind kind : cfg.channels) {
            const comms::ChannelModel channel{kind, snr_db, 0.0};
            const std::uint64_t cell_seed =
                derive_seed(cfg.master_seed, {seed_tag(snr_db), (std::uint64_t)kind, 0x6d69ull});

            const auto nn_decode = [&](const comms::SymbolFrame& frame) {
                return comms::demap_nearest(frame.rx_symbols, constellation).indices;
            };
            const auto dnn_decode = [&](const comms::SymbolFrame& frame) {
                return baseline.classify(frame.rx_symbols, snr_db);
            };

            const double mi_ddpm = comms::mutual_information(
                joint_counts_for(shaped.probs, constellation, channel, cfg.symbols_per_point,
                                 derive_seed(cell_seed, {1}), nn_decode));
            const double mi_dnn = comms::mutual_information(
                joint_counts_for(uniform, constellation, channel, cfg.symbols_per_point,
                                 derive_seed(cell_seed, {2}), dnn_decode));

            cells.push_back({snr_db, kind, "ddpm-shaped", mi_ddpm, cfg.symbols_per_point,
                             cell_seed, ddpm_sum});
            cells.push_back({snr_db, kind, "dnn-baseline", mi_dnn, cfg.symbols_per_point,
                             cell_seed, dnn_sum});
            log_info("mi  snr %+6.1f dB %-9s ddpm-shaped %.4f dnn %.4f", snr_db,
                     channel_name(kind), mi_ddpm, mi_dnn);
        }
    }
    return cells;
}

}  // namespace diffphy::pipelines
