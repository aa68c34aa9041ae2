// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Heavier criteria train their artifacts inside their own timer.
// Criterion 9 drives the CLI binary (path from DIFFPHY_BIN, falling back
// to ../tools/diffphy next to this executable).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "diffphy/diffphy.hpp"

using namespace diffphy;
namespace fs = std::filesystem;
using clk = std::chrono::steady_clock;

namespace {

int g_failures = 0;

struct CriterionResult {
    bool pass = true;
    std::vector<std::string> notes;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            notes.push_back("FAILED: " + what);
        }
    }
    void note(const std::string& what) { notes.push_back(what); }
};

void run_criterion(int number, const std::string& name, double budget_s,
                   const std::function<void(CriterionResult&)>& body) {
    CriterionResult result;
    const auto t0 = clk::now();
    try {
        body(result);
    } catch (const std::exception& e) {
        result.pass = false;
        result.notes.push_back(std::string("exception: ") + e.what());
    }
    const double elapsed = std::chrono::duration<double>(clk::now() - t0).count();
    if (budget_s > 0.0 && elapsed > budget_s) {
        result.pass = false;
        result.notes.push_back("runtime budget exceeded: " + std::to_string(elapsed) + " s > " +
                               std::to_string(budget_s) + " s");
    }
    std::printf("[%s] criterion %d: %s (%.1f s)\n", result.pass ? "PASS" : "FAIL", number,
                name.c_str(), elapsed);
    for (const auto& n : result.notes) std::printf("       %s\n", n.c_str());
    std::fflush(stdout);
    if (!result.pass) ++g_failures;
}

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
    return m;
}

// ---- shared artifacts (trained inside the criteria that own them) ----

std::optional<pipelines::DdpmTrainResult> g_ddpm16;
std::optional<pipelines::BaselineTrainResult> g_baseline16;
std::optional<pipelines::DdpmTrainResult> g_ddpm64;
std::optional<pipelines::BaselineTrainResult> g_baseline64;
std::optional<pipelines::ShapedDistribution> g_shape64_low;   // -5 dB
std::optional<pipelines::ShapedDistribution> g_shape64_high;  // +20 dB
const std::vector<pipelines::BerCell>* g_laplacian_cells = nullptr;

double nearest_point_distance(double re, double im, const comms::Constellation& c) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : c.points) best = std::min(best, std::hypot(re - p.real(), im - p.imag()));
    return best;
}

/// One-sided two-proportion z statistic for H1: p_dnn > p_ddpm.
double improvement_z(double p_ddpm, double p_dnn, double n_bits) {
    const double pooled = 0.5 * (p_ddpm + p_dnn);
    const double se = std::sqrt(pooled * (1.0 - pooled) * 2.0 / n_bits);
    return se > 0.0 ? (p_dnn - p_ddpm) / se : 0.0;
}

// ---- criteria ----

void criterion1_gradient_oracle(CriterionResult& r) {
    Rng rng(811);
    auto net = nn::init_weights({2, 8, 8, 2}, 812, nn::HiddenActivation::Softplus,
                                nn::OutputActivation::Linear, /*embed_dim=*/8);
    const Eigen::MatrixXd x = random_matrix(2, 4, rng);
    const Eigen::MatrixXd e = random_matrix(8, 4, rng);
    const Eigen::MatrixXd g = random_matrix(2, 4, rng);

    nn::ForwardCache cache;
    nn::forward(net, x, &e, &cache);
    const auto back = nn::backward(net, cache, g);

    auto probe = [&] { return (nn::forward(net, x, &e).array() * g.array()).sum(); };
    const double h = 1e-5;
    double worst = 0.0;
    long checked = 0;
    auto check = [&](double& param, double analytic) {
        const double saved = param;
        param = saved + h;
        const double up = probe();
        param = saved - h;
        const double down = probe();
        param = saved;
        const double fd = (up - down) / (2.0 * h);
        worst = std::max(worst, std::fabs(fd - analytic) /
                                    std::max({std::fabs(fd), std::fabs(analytic), 1e-3}));
        ++checked;
    };
    for (std::size_t l = 0; l < net.weights.size(); ++l)
        for (Eigen::Index i = 0; i < net.weights[l].size(); ++i)
            check(net.weights[l].data()[i], back.grads.weights[l].data()[i]);
    for (std::size_t l = 0; l < net.biases.size(); ++l)
        for (Eigen::Index i = 0; i < net.biases[l].size(); ++i)
            check(net.biases[l].data()[i], back.grads.biases[l].data()[i]);
    for (std::size_t l = 0; l < net.cond_proj.size(); ++l)
        for (Eigen::Index i = 0; i < net.cond_proj[l].size(); ++i)
            check(net.cond_proj[l].data()[i], back.grads.cond_proj[l].data()[i]);

    r.note("checked " + std::to_string(checked) + " parameters, worst relative error " +
           std::to_string(worst));
    r.require(worst < 1e-4, "finite-difference match below 1e-4");
}

void criterion2_diffusion_identities(CriterionResult& r) {
    const auto sched = diffusion::linear_schedule(100, 1e-4, 0.02);

    double worst_identity = 0.0;
    for (int t = 2; t <= sched.steps; ++t)
        worst_identity = std::max(
            worst_identity,
            std::fabs(sched.alpha_bar_at(t) / sched.alpha_bar_at(t - 1) - sched.alpha_at(t)));
    r.note("cumulative-product identity worst deviation " + std::to_string(worst_identity));
    r.require(worst_identity < 1e-12, "schedule identity to 1e-12");

    // Forward moment match over 1e6 draws.
    const int t = 60;
    const double ab = sched.alpha_bar_at(t);
    const Eigen::Vector2d x0(1.0, 0.5);
    Rng rng(821);
    std::normal_distribution<double> normal(0.0, 1.0);
    const long n = 1000000;
    Eigen::Vector2d sum = Eigen::Vector2d::Zero(), sum_sq = Eigen::Vector2d::Zero();
    for (long i = 0; i < n; ++i) {
        const Eigen::Vector2d eps(normal(rng), normal(rng));
        const Eigen::Vector2d xt = std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * eps;
        sum += xt;
        sum_sq += xt.cwiseProduct(xt);
    }
    const Eigen::Vector2d mean = sum / n;
    const Eigen::Vector2d var = sum_sq / n - mean.cwiseProduct(mean);
    for (int c = 0; c < 2; ++c) {
        const double expected_mean = std::sqrt(ab) * x0[c];
        r.require(std::fabs(mean[c] - expected_mean) <=
                      0.01 * std::fabs(expected_mean) + 3e-3,
                  "forward mean within 1% (coord " + std::to_string(c) + ")");
        r.require(std::fabs(var[c] - (1.0 - ab)) <= 0.01 * (1.0 - ab),
                  "forward variance within 1% (coord " + std::to_string(c) + ")");
    }

    // t = 1 perfect-prediction round trip.
    double worst_rt = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::Vector2d x0t(normal(rng), normal(rng));
        const Eigen::Vector2d eps(normal(rng), normal(rng));
        const Eigen::VectorXd x1 = diffusion::forward_diffuse(x0t, 1, eps, sched);
        const Eigen::VectorXd back =
            diffusion::reverse_step_from_eps(x1, 1, eps, Eigen::Vector2d::Zero(), sched);
        worst_rt = std::max(worst_rt, (back - x0t).cwiseAbs().maxCoeff());
    }
    r.note("t=1 round-trip worst deviation " + std::to_string(worst_rt));
    r.require(worst_rt < 1e-9, "t=1 perfect-prediction round trip to 1e-9");
}

void criterion3_training_progress(CriterionResult& r) {
    g_ddpm16 = pipelines::train_ddpm_on_constellation(16, pipelines::DdpmTrainHyper{}, 1001);
    const double initial = g_ddpm16->initial_loss;
    const double final_loss = g_ddpm16->epoch_losses.back();
    r.note("loss at initialization " + std::to_string(initial) + ", final epoch mean " +
           std::to_string(final_loss) + " (ratio " + std::to_string(final_loss / initial) + ")");
    r.require(final_loss < 0.25 * initial, "final-epoch loss < 0.25 x loss at initialization");

    const comms::Constellation qam = comms::build_qam(16);
    Rng rng(831);
    const Eigen::MatrixXd samples = diffusion::sample(g_ddpm16->model, 10000, rng);
    int within = 0;
    for (Eigen::Index i = 0; i < samples.cols(); ++i)
        if (nearest_point_distance(samples(0, i), samples(1, i), qam) <= 0.2) ++within;
    r.note("mode coverage: " + std::to_string(within / 100.0) + "% of samples within 0.2");
    r.require(within >= 9000, "mode coverage >= 90% within 0.2 of a constellation point");
}

void criterion4_receiver_improvement(CriterionResult& r) {
    g_baseline16 =
        pipelines::train_dnn_baseline(16, -25.0, -5.0, 1002, pipelines::BaselineTrainHyper{});

    pipelines::ReceiverExperimentConfig cfg;
    cfg.snr_grid_db = {-5.0};
    cfg.kappa = 0.1;
    cfg.symbols_per_point = 50000;  // 2e5 bits
    cfg.sampling_runs = 10;
    cfg.master_seed = 1003;
    cfg.channels = {comms::ChannelKind::HardwareImpairedAwgn, comms::ChannelKind::Laplacian};
    const auto cells =
        pipelines::run_receiver_ber_sweep(g_ddpm16->model, g_baseline16->dnn, cfg);

    double ddpm = -1.0, dnn = -1.0, n_bits = 0.0;
    for (const auto& cell : cells)
        if (cell.channel == comms::ChannelKind::HardwareImpairedAwgn) {
            (cell.receiver == "ddpm" ? ddpm : dnn) = cell.ber;
            n_bits = static_cast<double>(cell.n_bits);
        }
    // Stash the Laplacian cells for criterion 5.
    static std::vector<pipelines::BerCell> laplacian_cells;
    laplacian_cells.clear();
    for (const auto& cell : cells)
        if (cell.channel == comms::ChannelKind::Laplacian) laplacian_cells.push_back(cell);
    g_laplacian_cells = &laplacian_cells;

    const double z = improvement_z(ddpm, dnn, n_bits);
    const double improvement = (dnn - ddpm) / dnn;
    r.note("AWGN+kappa=0.1 at -5 dB over " + std::to_string((long)n_bits) +
           " bits: ddpm " + std::to_string(ddpm) + ", dnn " + std::to_string(dnn) + ", z = " +
           std::to_string(z));
    r.note("relative improvement " + std::to_string(100.0 * improvement) +
           "% (soft target 20-40%)");
    r.require(ddpm < dnn && z > 1.6449, "DDPM BER below DNN BER at 95% binomial confidence");
    if (improvement < 0.10)
        r.note("FLAG: relative improvement below 10% (criterion records, does not gate)");
}

void criterion5_ood_robustness(CriterionResult& r) {
    r.require(g_laplacian_cells != nullptr && g_laplacian_cells->size() == 2,
              "Laplacian cells available from criterion 4 sweep");
    if (!g_laplacian_cells || g_laplacian_cells->size() != 2) return;

    // The identical checkpoint must serve the Laplacian rows.
    const std::string checksum_now = io::model_checksum(g_ddpm16->model);
    for (const auto& cell : *g_laplacian_cells)
        if (cell.receiver == "ddpm")
            r.require(cell.model_checksum == checksum_now,
                      "checksum-verified identical DDPM checkpoint (no retraining)");

    double ddpm = -1.0, dnn = -1.0, n_bits = 0.0;
    for (const auto& cell : *g_laplacian_cells) {
        (cell.receiver == "ddpm" ? ddpm : dnn) = cell.ber;
        n_bits = static_cast<double>(cell.n_bits);
    }
    const double z = improvement_z(ddpm, dnn, n_bits);
    r.note("Laplacian at -5 dB: ddpm " + std::to_string(ddpm) + ", dnn " + std::to_string(dnn) +
           ", improvement " + std::to_string(100.0 * (dnn - ddpm) / dnn) + "%, z = " +
           std::to_string(z));
    r.require(ddpm < dnn, "DDPM Laplacian BER below DNN Laplacian BER");
}

void criterion6_mi_oracles(CriterionResult& r) {
    for (int m : {4, 16, 64}) {
        comms::JointCounts identity = comms::JointCounts::Zero(m, m);
        for (int i = 0; i < m; ++i) identity(i, i) = 1000;
        r.require(comms::mutual_information(identity) == std::log2(double(m)),
                  "identity joint = log2(" + std::to_string(m) + ") exactly");
    }
    const std::vector<std::int64_t> a{1, 3, 2, 4}, b{2, 5, 1, 3};
    comms::JointCounts indep(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) indep(i, j) = a[i] * b[j];
    r.require(comms::mutual_information(indep) < 1e-12, "independent joint = 0");

    comms::JointCounts binary(2, 2);
    binary << 45, 5, 5, 45;
    const double mi = comms::mutual_information(binary);
    r.note("binary 0.9/0.1 estimate " + std::to_string(mi));
    r.require(std::fabs(mi - 0.5310) <= 1e-3, "binary 0.9/0.1 case = 0.5310 +- 1e-3");
}

void criterion7_mi_sweep_shape(CriterionResult& r) {
    g_ddpm64 = pipelines::train_ddpm_on_constellation(64, pipelines::DdpmTrainHyper{}, 1004);
    g_baseline64 =
        pipelines::train_dnn_baseline(64, -25.0, -5.0, 1006, pipelines::BaselineTrainHyper{});

    auto run_for = [&](int m, const diffusion::DiffusionModel& model,
                       const pipelines::BaselineDnn& baseline) {
        pipelines::MiExperimentConfig cfg;
        cfg.m = m;
        cfg.symbols_per_point = 100000;
        cfg.shaping_samples = 20000;
        cfg.master_seed = 1007 + m;
        cfg.channels = {comms::ChannelKind::Awgn};
        return pipelines::run_mi_sweep(model, baseline, cfg);
    };
    const auto mi16 = run_for(16, g_ddpm16->model, g_baseline16->dnn);
    const auto mi64 = run_for(64, g_ddpm64->model, g_baseline64->dnn);

    auto column = [](const std::vector<pipelines::MiCell>& cells, const std::string& arm) {
        std::vector<double> out;
        for (const auto& cell : cells)
            if (cell.arm == arm) out.push_back(cell.mi_bits);
        return out;
    };
    auto monotone_within = [](const std::vector<double>& v, double tol) {
        for (std::size_t i = 1; i < v.size(); ++i)
            if (v[i] < v[i - 1] - tol) return false;
        return true;
    };
    for (const auto* cells : {&mi16, &mi64}) {
        const int m = (cells == &mi16) ? 16 : 64;
        for (const char* arm : {"ddpm-shaped", "dnn-baseline"}) {
            const auto col = column(*cells, arm);
            r.require(monotone_within(col, 0.05), std::to_string(m) + "-QAM " + arm +
                                                      " MI monotone non-decreasing (0.05 tol)");
        }
    }

    // +30 dB, uniform shaping: MI >= 0.95 log2 M  (uniform source, NN demap).
    for (int m : {16, 64}) {
        const comms::Constellation c = comms::build_qam(m);
        const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(m, 1.0 / m);
        const auto nn_decode = [&](const comms::SymbolFrame& frame) {
            return comms::demap_nearest(frame.rx_symbols, c).indices;
        };
        const auto counts = pipelines::joint_counts_for(
            uniform, c, {comms::ChannelKind::Awgn, 30.0, 0.0}, 100000, 900 + m, nn_decode);
        const double mi = comms::mutual_information(counts);
        r.note("+30 dB uniform " + std::to_string(m) + "-QAM MI = " + std::to_string(mi));
        r.require(mi >= 0.95 * std::log2(double(m)),
                  "+30 dB uniform MI >= 0.95 log2 M for " + std::to_string(m) + "-QAM");
    }

    // -5 dB: DDPM-shaped MI >= DNN-baseline MI, both orders.
    auto at_snr = [](const std::vector<pipelines::MiCell>& cells, double snr,
                     const std::string& arm) {
        for (const auto& cell : cells)
            if (cell.snr_db == snr && cell.arm == arm) return cell.mi_bits;
        return -1.0;
    };
    for (const auto* cells : {&mi16, &mi64}) {
        const int m = (cells == &mi16) ? 16 : 64;
        const double shaped = at_snr(*cells, -5.0, "ddpm-shaped");
        const double base = at_snr(*cells, -5.0, "dnn-baseline");
        r.note(std::to_string(m) + "-QAM at -5 dB: ddpm-shaped " + std::to_string(shaped) +
               " bits vs dnn-baseline " + std::to_string(base) + " bits");
        r.require(shaped >= base, std::to_string(m) + "-QAM: shaped MI >= baseline MI at -5 dB");
    }
    // Paper magnitudes, recorded but not gated: ~1 bit (16-QAM) and ~1.25
    // bits (64-QAM) in the low-SNR plateau; benchmark internals unpublished.
    r.note("paper-reported low-SNR magnitudes for comparison: 16-QAM ~1 bit, 64-QAM ~1.25 bits");

    // Keep shaped distributions for criterion 8.
    const comms::Constellation qam64 = comms::build_qam(64);
    g_shape64_low = pipelines::shape_constellation(g_ddpm64->model, qam64, -5.0, 20000, 1011);
    g_shape64_high = pipelines::shape_constellation(g_ddpm64->model, qam64, 20.0, 20000, 1012);
}

void criterion8_shaping_validity(CriterionResult& r) {
    r.require(g_shape64_low.has_value() && g_shape64_high.has_value(),
              "shaped distributions available from criterion 7");
    if (!g_shape64_low || !g_shape64_high) return;

    for (const auto* dist : {&*g_shape64_low, &*g_shape64_high}) {
        r.require(std::fabs(dist->probs.sum() - 1.0) <= 1e-9, "probabilities sum to 1 (1e-9)");
        r.require(dist->probs.minCoeff() >= 0.0, "probabilities non-negative");
    }
    const double h_low = comms::entropy_bits(g_shape64_low->probs);
    const double h_high = comms::entropy_bits(g_shape64_high->probs);
    r.note("64-QAM shaped entropy: " + std::to_string(h_low) + " bits at -5 dB vs " +
           std::to_string(h_high) + " bits at +20 dB");
    r.require(h_low < h_high, "entropy at -5 dB < entropy at +20 dB (64-QAM)");

    const comms::Constellation qam64 = comms::build_qam(64);
    const long n = 20000;
    const auto uniform_dist =
        pipelines::shape_constellation(g_ddpm64->model, qam64, 60.0, n, 1013);
    const double p = 1.0 / 64.0;
    const double tol = 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    double worst = 0.0;
    for (int k = 0; k < 64; ++k) worst = std::max(worst, std::fabs(uniform_dist.probs[k] - p));
    r.note("+60 dB max |prob - 1/64| = " + std::to_string(worst) + " (3-sigma tol " +
           std::to_string(tol) + ")");
    r.require(worst < tol, "+60 dB shaping uniform within multinomial tolerance");
}

void criterion9_reproducibility(CriterionResult& r) {
    const char* env = std::getenv("DIFFPHY_BIN");
    fs::path bin;
    if (env != nullptr) {
        bin = env;
    } else {
        std::error_code ec;
        const fs::path self = fs::read_symlink("/proc/self/exe", ec);
        if (!ec) bin = self.parent_path().parent_path() / "tools" / "diffphy";
    }
    r.require(!bin.empty() && fs::exists(bin),
              "CLI binary located (DIFFPHY_BIN or build tree layout)");
    if (bin.empty() || !fs::exists(bin)) return;

    const fs::path tmp = fs::temp_directory_path() / "diffphy_acceptance_c9";
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    io::save_checkpoint(g_ddpm16->model, tmp / "ddpm.ckpt");
    io::save_checkpoint(g_baseline16->dnn, tmp / "baseline.ckpt");

    auto run = [&](const std::string& args) {
        const std::string cmd = "DIFFPHY_LOG=quiet " + bin.string() + " " + args + " > " +
                                (tmp / "cli.log").string() + " 2>&1";
        return WEXITSTATUS(std::system(cmd.c_str()));
    };

    // BER sweep: run, then re-run from the emitted config echo.
    int code = run("ber-sweep --seed 4242 --out-dir " + (tmp / "ber1").string() +
                   " --checkpoint " + (tmp / "ddpm.ckpt").string() + " --baseline-checkpoint " +
                   (tmp / "baseline.ckpt").string() +
                   " --snr-grid=-10:5:-5 -O experiment.symbols_per_point=500"
                   " -O experiment.sampling_runs=2");
    r.require(code == 0, "ber-sweep exits 0 (got " + std::to_string(code) + ")");
    code = run("ber-sweep --config " + (tmp / "ber1" / "config_echo.ini").string() +
               " --out-dir " + (tmp / "ber2").string());
    r.require(code == 0, "ber-sweep rerun from echo exits 0");
    const std::string ber1 = io::read_file(tmp / "ber1" / "ber_sweep.csv");
    const std::string ber2 = io::read_file(tmp / "ber2" / "ber_sweep.csv");
    r.require(!ber1.empty() && ber1 == ber2, "ber-sweep CSV reproduced cell-for-cell from echo");

    // MI sweep likewise.
    code = run("mi-sweep --seed 777 --out-dir " + (tmp / "mi1").string() + " --checkpoint " +
               (tmp / "ddpm.ckpt").string() + " --baseline-checkpoint " +
               (tmp / "baseline.ckpt").string() +
               " --snr-grid=-10:5:-5 -O experiment.mi_symbols_per_point=5000"
               " -O experiment.shaping_samples=1000");
    r.require(code == 0, "mi-sweep exits 0 (got " + std::to_string(code) + ")");
    code = run("mi-sweep --config " + (tmp / "mi1" / "config_echo.ini").string() + " --out-dir " +
               (tmp / "mi2").string());
    r.require(code == 0, "mi-sweep rerun from echo exits 0");
    const std::string mi1 = io::read_file(tmp / "mi1" / "mi_sweep.csv");
    const std::string mi2 = io::read_file(tmp / "mi2" / "mi_sweep.csv");
    r.require(!mi1.empty() && mi1 == mi2, "mi-sweep CSV reproduced cell-for-cell from echo");

    fs::remove_all(tmp);
}

}  // namespace

int main() {
    std::setvbuf(stdout, nullptr, _IOLBF, 0);
    run_criterion(1, "gradient oracle (2->8->8->2 time-conditioned, FD < 1e-4)", 10.0,
                  criterion1_gradient_oracle);
    run_criterion(2, "diffusion identities (schedule, moments, t=1 round trip)", 30.0,
                  criterion2_diffusion_identities);
    run_criterion(3, "training progress and mode coverage (16-QAM defaults)", 300.0,
                  criterion3_training_progress);
    run_criterion(4, "receiver improvement at -5 dB (AWGN + kappa=0.1)", 600.0,
                  criterion4_receiver_improvement);
    run_criterion(5, "OOD robustness (Laplacian, identical checkpoint)", 0.0,
                  criterion5_ood_robustness);
    run_criterion(6, "mutual information estimator oracles", 1.0, criterion6_mi_oracles);
    run_criterion(7, "MI sweep shape (monotone, high-SNR, -5 dB comparison)", 900.0,
                  criterion7_mi_sweep_shape);
    run_criterion(8, "shaping validity (sums, entropy ordering, uniform limit)", 0.0,
                  criterion8_shaping_validity);
    run_criterion(9, "reproducibility from emitted config echo + seed", 0.0,
                  criterion9_reproducibility);

    if (g_failures == 0)
        std::printf("acceptance: all criteria passed\n");
    else
        std::printf("acceptance: %d criteria FAILED\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
