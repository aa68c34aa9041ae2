#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "diffphy/diffphy.hpp"
#include "diffphy/log.hpp"

namespace fs = std::filesystem;
using namespace diffphy;

namespace {

// Exit codes: 0 success, 2 configuration, 3 training, 4 I/O, 1 unexpected.
constexpr int kExitOk = 0;
constexpr int kExitUnexpected = 1;
constexpr int kExitConfig = 2;
constexpr int kExitTraining = 3;
constexpr int kExitIo = 4;

struct CliArgs {
    std::string subcommand;
    std::optional<std::string> config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::string> checkpoint;
    std::optional<std::string> baseline_checkpoint;
    std::optional<std::string> snr_grid;
    bool plot = false;
    std::vector<std::string> overrides;
};

io::RunConfig resolve_config(const CliArgs& args) {
    io::RunConfig cfg;
    if (args.config_path) cfg = io::parse_config(*args.config_path);
    cfg.kind = args.subcommand;
    if (args.seed) cfg.seed = *args.seed;
    if (args.out_dir) cfg.out_dir = *args.out_dir;
    if (args.checkpoint) cfg.checkpoint = *args.checkpoint;
    if (args.baseline_checkpoint) cfg.baseline_checkpoint = *args.baseline_checkpoint;
    if (args.snr_grid) cfg.snr_grid = io::expand_snr_grid(*args.snr_grid);
    if (args.plot) cfg.plot = true;
    for (const auto& assignment : args.overrides) io::apply_override(cfg, assignment);
    return cfg;
}

void require_field(const std::string& value, const std::string& field) {
    if (value.empty()) throw ConfigError("missing required field: " + field);
}

pipelines::DdpmTrainHyper ddpm_hyper(const io::RunConfig& cfg) {
    pipelines::DdpmTrainHyper hyper;
    hyper.steps = cfg.schedule_steps;
    hyper.beta_start = cfg.beta_start;
    hyper.beta_end = cfg.beta_end;
    hyper.dataset_size = cfg.train_dataset_size;
    hyper.batch_size = cfg.train_batch_size;
    hyper.epochs = cfg.train_epochs;
    hyper.adam.learning_rate = cfg.train_learning_rate;
    hyper.adam.beta1 = cfg.adam_beta1;
    hyper.adam.beta2 = cfg.adam_beta2;
    hyper.adam.epsilon = cfg.adam_epsilon;
    hyper.hidden_width = cfg.hidden_width;
    hyper.n_hidden = cfg.hidden_layers;
    hyper.embed_dim = cfg.embed_dim;
    return hyper;
}

pipelines::BaselineTrainHyper baseline_hyper(const io::RunConfig& cfg) {
    pipelines::BaselineTrainHyper hyper;
    hyper.dataset_size = cfg.baseline_dataset_size;
    hyper.batch_size = cfg.baseline_batch_size;
    hyper.epochs = cfg.baseline_epochs;
    hyper.adam.learning_rate = cfg.baseline_learning_rate;
    hyper.hidden_width = cfg.hidden_width;
    hyper.n_hidden = cfg.hidden_layers;
    return hyper;
}

void write_loss_trace(const std::vector<double>& losses, const io::RunConfig& cfg,
                      const std::string& checksum, const fs::path& path) {
    io::ResultTable table;
    table.columns = {{"epoch", ""}, {"loss", ""}};
    table.add_metadata("tool_version", kToolVersion);
    table.add_metadata("subcommand", cfg.kind);
    table.add_metadata("seed", std::to_string(cfg.seed));
    table.add_metadata("m", std::to_string(cfg.m));
    table.add_metadata("model_checksum", checksum);
    for (std::size_t i = 0; i < losses.size(); ++i)
        table.add_row({static_cast<double>(i + 1), losses[i]});
    io::write_results(table, path);
}

void add_common_metadata(io::ResultTable& table, const io::RunConfig& cfg) {
    table.add_metadata("tool_version", kToolVersion);
    table.add_metadata("subcommand", cfg.kind);
    table.add_metadata("seed", std::to_string(cfg.seed));
    table.add_metadata("m", std::to_string(cfg.m));
}

int run_train_ddpm(const io::RunConfig& cfg) {
    const auto result = pipelines::train_ddpm_on_constellation(cfg.m, ddpm_hyper(cfg), cfg.seed);
    const std::string checksum = io::model_checksum(result.model);
    const fs::path ckpt = cfg.checkpoint.empty()
                              ? fs::path(cfg.out_dir) / ("ddpm_qam" + std::to_string(cfg.m) + ".ckpt")
                              : fs::path(cfg.checkpoint);
    io::save_checkpoint(result.model, ckpt);
    write_loss_trace(result.epoch_losses, cfg, checksum,
                     fs::path(cfg.out_dir) / "train_ddpm_loss.csv");
    log_info("trained ddpm on %d-QAM: final loss %.5f, checkpoint %s (checksum %s)", cfg.m,
             result.epoch_losses.back(), ckpt.string().c_str(), checksum.c_str());
    return kExitOk;
}

int run_train_baseline(const io::RunConfig& cfg) {
    const auto result = pipelines::train_dnn_baseline(
        cfg.m, cfg.baseline_snr_min_db, cfg.baseline_snr_max_db, cfg.seed, baseline_hyper(cfg));
    const std::string checksum = io::model_checksum(result.dnn);
    const fs::path ckpt = cfg.baseline_checkpoint.empty()
                              ? fs::path(cfg.out_dir) /
                                    ("baseline_qam" + std::to_string(cfg.m) + ".ckpt")
                              : fs::path(cfg.baseline_checkpoint);
    io::save_checkpoint(result.dnn, ckpt);
    write_loss_trace(result.epoch_losses, cfg, checksum,
                     fs::path(cfg.out_dir) / "train_baseline_loss.csv");
    log_info("trained baseline on %d-QAM: final loss %.5f, checkpoint %s (checksum %s)", cfg.m,
             result.epoch_losses.back(), ckpt.string().c_str(), checksum.c_str());
    return kExitOk;
}

int run_ber_sweep(const io::RunConfig& cfg) {
    require_field(cfg.checkpoint, "run.checkpoint");
    require_field(cfg.baseline_checkpoint, "run.baseline_checkpoint");
    const auto model = io::load_ddpm_checkpoint(cfg.checkpoint);
    const auto baseline = io::load_baseline_checkpoint(cfg.baseline_checkpoint);

    pipelines::ReceiverExperimentConfig exp;
    exp.m = cfg.m;
    exp.snr_grid_db = cfg.snr_grid;
    exp.kappa = cfg.kappa;
    exp.symbols_per_point = cfg.symbols_per_point;
    exp.sampling_runs = cfg.sampling_runs;
    exp.master_seed = cfg.seed;
    const auto cells = pipelines::run_receiver_ber_sweep(model, baseline, exp);

    io::ResultTable table;
    table.columns = {{"snr_db", "dB"}, {"channel", ""}, {"receiver", ""}, {"ber", ""},
                     {"n_bits", ""},   {"seed", ""},    {"model_checksum", ""}};
    add_common_metadata(table, cfg);
    table.add_metadata("kappa", std::to_string(cfg.kappa));
    table.add_metadata("symbols_per_point", std::to_string(cfg.symbols_per_point));
    table.add_metadata("sampling_runs", std::to_string(cfg.sampling_runs));
    table.add_metadata("ddpm_checkpoint", cfg.checkpoint);
    table.add_metadata("ddpm_checksum", io::model_checksum(model));
    table.add_metadata("baseline_checkpoint", cfg.baseline_checkpoint);
    table.add_metadata("baseline_checksum", io::model_checksum(baseline));
    for (const auto& cell : cells)
        table.add_row({cell.snr_db, std::string(comms::channel_name(cell.channel)), cell.receiver,
                       cell.ber, static_cast<double>(cell.n_bits),
                       std::to_string(cell.seed), cell.model_checksum});
    io::write_results(table, fs::path(cfg.out_dir) / "ber_sweep.csv");

    if (cfg.plot) {
        std::vector<io::PlotSeries> series;
        for (const char* receiver : {"ddpm", "dnn"})
            for (comms::ChannelKind kind :
                 {comms::ChannelKind::Awgn, comms::ChannelKind::Laplacian,
                  comms::ChannelKind::HardwareImpairedAwgn}) {
                io::PlotSeries s;
                s.label = std::string(receiver) + " " + comms::channel_name(kind);
                for (const auto& cell : cells)
                    if (cell.receiver == receiver && cell.channel == kind) {
                        s.x.push_back(cell.snr_db);
                        s.y.push_back(cell.ber);
                    }
                if (!s.x.empty()) series.push_back(std::move(s));
            }
        io::write_line_plot_svg(series, "transmit SNR (dB)", "BER", /*y_log=*/true,
                                fs::path(cfg.out_dir) / "ber_sweep.svg");
    }
    return kExitOk;
}

int run_mi_sweep(const io::RunConfig& cfg) {
    require_field(cfg.checkpoint, "run.checkpoint");
    require_field(cfg.baseline_checkpoint, "run.baseline_checkpoint");
    const auto model = io::load_ddpm_checkpoint(cfg.checkpoint);
    const auto baseline = io::load_baseline_checkpoint(cfg.baseline_checkpoint);

    pipelines::MiExperimentConfig exp;
    exp.m = cfg.m;
    exp.snr_grid_db = cfg.snr_grid;
    exp.symbols_per_point = cfg.mi_symbols_per_point;
    exp.shaping_samples = cfg.shaping_samples;
    exp.master_seed = cfg.seed;
    const auto cells = pipelines::run_mi_sweep(model, baseline, exp);

    io::ResultTable table;
    table.columns = {{"snr_db", "dB"}, {"channel", ""}, {"arm", ""}, {"mi", "bits"},
                     {"n_symbols", ""}, {"seed", ""},   {"model_checksum", ""}};
    add_common_metadata(table, cfg);
    table.add_metadata("mi_symbols_per_point", std::to_string(cfg.mi_symbols_per_point));
    table.add_metadata("shaping_samples", std::to_string(cfg.shaping_samples));
    table.add_metadata("ddpm_checkpoint", cfg.checkpoint);
    table.add_metadata("ddpm_checksum", io::model_checksum(model));
    table.add_metadata("baseline_checkpoint", cfg.baseline_checkpoint);
    table.add_metadata("baseline_checksum", io::model_checksum(baseline));
    for (const auto& cell : cells)
        table.add_row({cell.snr_db, std::string(comms::channel_name(cell.channel)), cell.arm,
                       cell.mi_bits, static_cast<double>(cell.n_symbols),
                       std::to_string(cell.seed), cell.model_checksum});
    io::write_results(table, fs::path(cfg.out_dir) / "mi_sweep.csv");

    if (cfg.plot) {
        std::vector<io::PlotSeries> series;
        for (const char* arm : {"ddpm-shaped", "dnn-baseline"})
            for (comms::ChannelKind kind :
                 {comms::ChannelKind::Awgn, comms::ChannelKind::Laplacian}) {
                io::PlotSeries s;
                s.label = std::string(arm) + " " + comms::channel_name(kind);
                for (const auto& cell : cells)
                    if (cell.arm == arm && cell.channel == kind) {
                        s.x.push_back(cell.snr_db);
                        s.y.push_back(cell.mi_bits);
                    }
                if (!s.x.empty()) series.push_back(std::move(s));
            }
        io::write_line_plot_svg(series, "SNR (dB)", "mutual information (bits)", /*y_log=*/false,
                                fs::path(cfg.out_dir) / "mi_sweep.svg");
    }
    return kExitOk;
}

int run_shape(const io::RunConfig& cfg) {
    require_field(cfg.checkpoint, "run.checkpoint");
    const auto model = io::load_ddpm_checkpoint(cfg.checkpoint);
    const auto constellation = comms::build_qam(cfg.m);
    const auto shaped = pipelines::shape_constellation(model, constellation, cfg.shape_snr_db,
                                                       cfg.shaping_samples, cfg.seed);

    io::ResultTable table;
    table.columns = {{"symbol_index", ""}, {"label", ""}, {"i", ""}, {"q", ""}, {"prob", ""}};
    add_common_metadata(table, cfg);
    table.add_metadata("snr_db", io::detail::fmt_double(cfg.shape_snr_db));
    table.add_metadata("shaping_samples", std::to_string(cfg.shaping_samples));
    table.add_metadata("ddpm_checkpoint", cfg.checkpoint);
    table.add_metadata("ddpm_checksum", io::model_checksum(model));
    table.add_metadata("entropy_bits", io::detail::fmt_double(comms::entropy_bits(shaped.probs)));
    for (int k = 0; k < constellation.order; ++k)
        table.add_row({static_cast<double>(k), static_cast<double>(constellation.labels[k]),
                       constellation.points[k].real(), constellation.points[k].imag(),
                       shaped.probs[k]});
    io::write_results(table, fs::path(cfg.out_dir) / "shape.csv");
    log_info("shaped %d-QAM at %.1f dB: entropy %.4f bits", cfg.m, cfg.shape_snr_db,
             comms::entropy_bits(shaped.probs));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DDPM-based physical-layer simulation toolkit"};
    app.require_subcommand(1);

    CliArgs args;
    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", args.config_path, "INI config file");
        sub->add_option("--seed", args.seed, "master seed");
        sub->add_option("--out-dir", args.out_dir, "output directory");
        sub->add_option("--checkpoint", args.checkpoint, "DDPM checkpoint path");
        sub->add_option("--baseline-checkpoint", args.baseline_checkpoint,
                        "baseline checkpoint path");
        sub->add_option("--snr-grid", args.snr_grid,
                        "SNR grid, start:step:stop or comma list (dB)");
        sub->add_flag("--plot", args.plot, "emit an SVG plot next to the CSV");
        sub->add_option("-O,--set", args.overrides, "config override, section.key=value");
    };
    for (const char* name : {"train-ddpm", "train-baseline", "ber-sweep", "mi-sweep", "shape"})
        add_common(app.add_subcommand(name));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }
    args.subcommand = app.get_subcommands().front()->get_name();

    try {
        const io::RunConfig cfg = resolve_config(args);
        fs::create_directories(cfg.out_dir);
        io::write_config_echo(cfg, fs::path(cfg.out_dir) / "config_echo.ini");

        if (args.subcommand == "train-ddpm") return run_train_ddpm(cfg);
        if (args.subcommand == "train-baseline") return run_train_baseline(cfg);
        if (args.subcommand == "ber-sweep") return run_ber_sweep(cfg);
        if (args.subcommand == "mi-sweep") return run_mi_sweep(cfg);
        if (args.subcommand == "shape") return run_shape(cfg);
        std::fprintf(stderr, "unknown subcommand %s\n", args.subcommand.c_str());
        return kExitConfig;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const TrainingError& e) {
        std::fprintf(stderr, "training error: %s (%zu epochs completed)\n", e.what(),
                     e.loss_trace.size());
        return kExitTraining;
    } catch (const IoError& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return kExitIo;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "unexpected error: %s\n", e.what());
        return kExitUnexpected;
    }
}
