#pragma once

#include <Eigen/Core>
#include <algorithm>
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
#include "diffphy/rng.hpp"

namespace diffphy::pipelines {

struct DdpmTrainHyper {
    int steps = 100;            // diffusion steps T
    double beta_start = 1e-4;
    double beta_end = 0.02;
    long dataset_size = 100000;
    int batch_size = 256;
    int epochs = 30;
    nn::AdamConfig adam;
    int hidden_width = 128;
    int n_hidden = 3;
    int embed_dim = 128;
};

struct DdpmTrainResult {
    diffusion::DiffusionModel model;
    std::vector<double> epoch_losses;
    double initial_loss = 0.0;  // first-batch objective at initialization
};

/// Trains a denoiser on clean symbols drawn uniformly from the M-QAM
/// constellation; the forward process supplies all the noise structure.
inline DdpmTrainResult train_ddpm_on_constellation(int m, const DdpmTrainHyper& hyper,
                                                   std::uint64_t seed) {
    if (hyper.dataset_size <= 0 || hyper.batch_size <= 0 || hyper.epochs <= 0)
        throw DomainError("train_ddpm_on_constellation: non-positive training budget");
    const comms::Constellation constellation = comms::build_qam(m);

    DdpmTrainResult result;
    result.model = diffusion::make_diffusion_model(
        diffusion::linear_schedule(hyper.steps, hyper.beta_start, hyper.beta_end), seed,
        /*data_dim=*/2, hyper.hidden_width, hyper.n_hidden, hyper.embed_dim);

    Rng rng(derive_seed(seed, {0x64647065ull}));
    std::uniform_int_distribution<int> symbol_dist(0, m - 1);
    const long n = hyper.dataset_size;
    Eigen::MatrixXd data(2, n);
    for (long i = 0; i < n; ++i) {
        const auto p = constellation.points[symbol_dist(rng)];
        data(0, i) = p.real();
        data(1, i) = p.imag();
    }

    nn::AdamState adam;
    adam.config = hyper.adam;
    std::vector<long> order(n);
    for (long i = 0; i < n; ++i) order[i] = i;

    bool first_batch = true;
    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0.0;
        long seen = 0;
        for (long start = 0; start < n; start += hyper.batch_size) {
            const long b = std::min<long>(hyper.batch_size, n - start);
            Eigen::MatrixXd batch(2, b);
            for (long i = 0; i < b; ++i) batch.col(i) = data.col(order[start + i]);
            const auto lg = diffusion::training_loss(result.model, batch, rng);
            if (!std::isfinite(lg.loss))
                throw TrainingError("train_ddpm_on_constellation: loss diverged",
                                    result.epoch_losses);
            if (first_batch) {
                result.initial_loss = lg.loss;
                first_batch = false;
            }
            nn::adam_step(result.model.denoiser, lg.grads, adam);
            loss_sum += lg.loss * static_cast<double>(b);
            seen += b;
        }
        result.epoch_losses.push_back(loss_sum / static_cast<double>(seen));
        log_debug("ddpm epoch %d/%d loss %.5f", epoch + 1, hyper.epochs,
                  result.epoch_losses.back());
    }
    return result;
}

struct ReceiverExperimentConfig {
    int m = 16;
    std::vector<double> snr_grid_db = {-25.0, -22.5, -20.0, -17.5, -15.0,
                                       -12.5, -10.0, -7.5, -5.0};
    double kappa = 0.1;
    long symbols_per_point = 50000;  // 2e5 bits at 16-QAM
    int sampling_runs = 10;
    std::uint64_t master_seed = 1;
    std::vector<comms::ChannelKind> channels = {comms::ChannelKind::Awgn,
                                                comms::ChannelKind::Laplacian,
                                                comms::ChannelKind::HardwareImpairedAwgn};

    void validate() const {
        if (snr_grid_db.empty()) throw DomainError("receiver config: empty SNR grid");
        if (!std::is_sorted(snr_grid_db.begin(), snr_grid_db.end()))
            throw DomainError("receiver config: SNR grid must be sorted");
        if (sampling_runs < 1) throw DomainError("receiver config: sampling_runs must be >= 1");
        if (symbols_per_point <= 0) throw DomainError("receiver config: empty symbol budget");
    }
};

struct BerCell {
    double snr_db = 0.0;
    comms::ChannelKind channel = comms::ChannelKind::Awgn;
    std::string receiver;  // "ddpm" | "dnn"
    double ber = 0.0;
    long n_bits = 0;
    std::uint64_t seed = 0;
    std::string model_checksum;
};

namespace detail {

inline comms::BitVector random_bits(long n, Rng& rng) {
    std::uniform_int_distribution<int> bit(0, 1);
    comms::BitVector bits(n);
    for (long i = 0; i < n; ++i) bits[i] = static_cast<std::uint8_t>(bit(rng));
    return bits;
}

inline Eigen::MatrixXd to_matrix(const std::vector<comms::cdouble>& symbols) {
    Eigen::MatrixXd y(2, static_cast<Eigen::Index>(symbols.size()));
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        y(0, i) = symbols[i].real();
        y(1, i) = symbols[i].imag();
    }
    return y;
}

inline std::vector<comms::cdouble> to_symbols(const Eigen::MatrixXd& m) {
    std::vector<comms::cdouble> out(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) out[c] = comms::cdouble(m(0, c), m(1, c));
    return out;
}

}  // namespace detail

/// DDPM receiver for one received block: SNR-aligned partial denoising
/// (noise power folded with the impairment level), then minimum-distance
/// demapping; BER averaged over `sampling_runs` independent reverse runs.
inline double ddpm_receiver_ber(const diffusion::DiffusionModel& model,
                                const comms::Constellation& constellation,
                                const comms::BitVector& tx_bits, const comms::SymbolFrame& frame,
                                const comms::ChannelModel& channel, int sampling_runs,
                                std::uint64_t seed) {
    const Eigen::MatrixXd y = detail::to_matrix(frame.rx_symbols);
    const double snr_eff = channel.effective_snr_db();
    double ber_sum = 0.0;
    for (int run = 0; run < sampling_runs; ++run) {
        const Eigen::MatrixXd denoised =
            diffusion::denoise_batch(model, y, snr_eff, derive_seed(seed, {0x72756eull, (std::uint64_t)run}));
        const auto demapped = comms::demap_nearest(detail::to_symbols(denoised), constellation);
        ber_sum += comms::compute_ber(tx_bits, demapped.bits);
    }
    return ber_sum / sampling_runs;
}

/// BER of the supervised classifier on one received block.
inline double dnn_receiver_ber(const BaselineDnn& baseline,
                               const comms::Constellation& constellation,
                               const comms::BitVector& tx_bits, const comms::SymbolFrame& frame,
                               double snr_db) {
    const std::vector<int> indices = baseline.classify(frame.rx_symbols, snr_db);
    comms::BitVector bits;
    bits.reserve(tx_bits.size());
    for (int k : indices) comms::append_label_bits(k, constellation, bits);
    return comms::compute_ber(tx_bits, bits);
}

/// Case study 1: BER of the DDPM receiver vs the DNN benchmark over the
/// SNR grid and channel kinds. The same trained checkpoint is used for all
/// rows (checksummed for the out-of-distribution protocol).
inline std::vector<BerCell> run_receiver_ber_sweep(const diffusion::DiffusionModel& model,
                                                   const BaselineDnn& baseline,
                                                   const ReceiverExperimentConfig& cfg) {
    cfg.validate();
    model.validate();
    if (baseline.order() != cfg.m)
        throw StateError("run_receiver_ber_sweep: baseline order != configured m");
    const comms::Constellation constellation = comms::build_qam(cfg.m);
    const std::string ddpm_sum = io::model_checksum(model);
    const std::string dnn_sum = io::model_checksum(baseline);

    std::vector<BerCell> cells;
    for (double snr_db : cfg.snr_grid_db) {
        for (comms::ChannelKind kind : cfg.channels) {
            const comms::ChannelModel channel{kind, snr_db, cfg.kappa};
            const std::uint64_t cell_seed =
                derive_seed(cfg.master_seed, {seed_tag(snr_db), (std::uint64_t)kind});
            Rng rng(cell_seed);
            const comms::BitVector tx_bits =
                detail::random_bits(cfg.symbols_per_point * constellation.bits_per_symbol, rng);
            comms::SymbolFrame frame = comms::modulate(tx_bits, constellation);
            comms::apply_channel(frame, channel, rng);

            const long n_bits = static_cast<long>(tx_bits.size());
            cells.push_back({snr_db, kind, "ddpm",
                             ddpm_receiver_ber(model, constellation, tx_bits, frame, channel,
                                               cfg.sampling_runs, cell_seed),
                             n_bits, cell_seed, ddpm_sum});
            cells.push_back({snr_db, kind, "dnn",
                             dnn_receiver_ber(baseline, constellation, tx_bits, frame, snr_db),
                             n_bits, cell_seed, dnn_sum});
            log_info("ber snr %+6.1f dB %-9s ddpm %.5f dnn %.5f", snr_db, channel_name(kind),
                     cells[cells.size() - 2].ber, cells.back().ber);
        }
    }
    return cells;
}

}  // namespace diffphy::pipelines
