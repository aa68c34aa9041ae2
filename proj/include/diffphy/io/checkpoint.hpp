#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <utility>

#include "diffphy/diffusion/model.hpp"
#include "diffphy/errors.hpp"
#include "diffphy/io/file_io.hpp"
#include "diffphy/pipelines/baseline.hpp"
#include "diffphy/version.hpp"

namespace diffphy::io {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian; big-endian hosts are unsupported");

namespace detail {

inline constexpr char kMagic[8] = {'D', 'I', 'F', 'F', 'P', 'H', 'Y', 'C'};
inline constexpr std::uint32_t kKindDiffusion = 1;
inline constexpr std::uint32_t kKindBaseline = 2;

inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

struct ByteWriter {
    std::string buf;
    void raw(const void* p, std::size_t n) { buf.append(static_cast<const char*>(p), n); }
    void u32(std::uint32_t v) { raw(&v, sizeof(v)); }
    void u64(std::uint64_t v) { raw(&v, sizeof(v)); }
    void f64(double v) { raw(&v, sizeof(v)); }
    void matrix(const Eigen::MatrixXd& m) {
        u32(static_cast<std::uint32_t>(m.rows()));
        u32(static_cast<std::uint32_t>(m.cols()));
        raw(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
    }
    void vector(const Eigen::VectorXd& v) {
        u32(static_cast<std::uint32_t>(v.size()));
        raw(v.data(), sizeof(double) * static_cast<std::size_t>(v.size()));
    }
};

struct ByteReader {
    std::string_view buf;
    std::size_t pos = 0;
    void raw(void* p, std::size_t n) {
        if (pos + n > buf.size()) throw CorruptCheckpointError("checkpoint truncated");
        std::memcpy(p, buf.data() + pos, n);
        pos += n;
    }
    std::uint32_t u32() { std::uint32_t v; raw(&v, sizeof(v)); return v; }
    std::uint64_t u64() { std::uint64_t v; raw(&v, sizeof(v)); return v; }
    double f64() { double v; raw(&v, sizeof(v)); return v; }
    Eigen::MatrixXd matrix() {
        const std::uint32_t r = u32(), c = u32();
        if (static_cast<std::uint64_t>(r) * c > (1ull << 28))
            throw CorruptCheckpointError("checkpoint matrix unreasonably large");
        Eigen::MatrixXd m(r, c);
        raw(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
        return m;
    }
    Eigen::VectorXd vector() {
        const std::uint32_t n = u32();
        if (n > (1u << 28)) throw CorruptCheckpointError("checkpoint vector unreasonably large");
        Eigen::VectorXd v(n);
        raw(v.data(), sizeof(double) * static_cast<std::size_t>(v.size()));
        return v;
    }
};

inline void write_mlp(ByteWriter& w, const nn::Mlp& net) {
    w.u32(static_cast<std::uint32_t>(net.layer_dims.size()));
    for (int d : net.layer_dims) w.u32(static_cast<std::uint32_t>(d));
    w.u32(static_cast<std::uint32_t>(net.hidden_activation));
    w.u32(static_cast<std::uint32_t>(net.output_activation));
    w.u32(static_cast<std::uint32_t>(net.embed_dim));
    for (const auto& m : net.weights) w.matrix(m);
    for (const auto& b : net.biases) w.vector(b);
    for (const auto& p : net.cond_proj) w.matrix(p);
}

inline nn::Mlp read_mlp(ByteReader& r) {
    nn::Mlp net;
    const std::uint32_t n_dims = r.u32();
    if (n_dims < 2 || n_dims > 64) throw CorruptCheckpointError("checkpoint: bad layer count");
    for (std::uint32_t i = 0; i < n_dims; ++i) net.layer_dims.push_back(static_cast<int>(r.u32()));
    net.hidden_activation = static_cast<nn::HiddenActivation>(r.u32());
    net.output_activation = static_cast<nn::OutputActivation>(r.u32());
    net.embed_dim = static_cast<int>(r.u32());
    for (int l = 0; l < net.n_layers(); ++l) net.weights.push_back(r.matrix());
    for (int l = 0; l < net.n_layers(); ++l) net.biases.push_back(r.vector());
    if (net.embed_dim > 0)
        for (int l = 0; l < net.n_hidden(); ++l) net.cond_proj.push_back(r.matrix());
    return net;
}

inline std::string container(std::uint32_t kind, const std::string& payload) {
    ByteWriter w;
    w.raw(kMagic, sizeof(kMagic));
    ByteWriter body;
    body.u32(kCheckpointVersion);
    body.u32(kind);
    body.raw(payload.data(), payload.size());
    w.raw(body.buf.data(), body.buf.size());
    w.u64(fnv1a64(body.buf));
    return w.buf;
}

/// Verifies magic + checksum, checks the version, returns (kind, payload).
inline std::pair<std::uint32_t, std::string> open_container(const std::string& bytes) {
    if (bytes.size() < sizeof(kMagic) + 2 * sizeof(std::uint32_t) + sizeof(std::uint64_t))
        throw CorruptCheckpointError("checkpoint truncated");
    if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
        throw CorruptCheckpointError("checkpoint: bad magic");
    const std::string_view body(bytes.data() + sizeof(kMagic),
                                bytes.size() - sizeof(kMagic) - sizeof(std::uint64_t));
    std::uint64_t stored;
    std::memcpy(&stored, bytes.data() + bytes.size() - sizeof(stored), sizeof(stored));
    if (stored != fnv1a64(body))
        throw CorruptCheckpointError("checkpoint: checksum mismatch");
    ByteReader r{body};
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion)
        throw VersionMismatchError("checkpoint version " + std::to_string(version) +
                                   " incompatible with supported version " +
                                   std::to_string(kCheckpointVersion));
    const std::uint32_t kind = r.u32();
    return {kind, std::string(body.substr(r.pos))};
}

}  // namespace detail

inline std::string serialize(const diffusion::DiffusionModel& model) {
    detail::ByteWriter payload;
    payload.u32(static_cast<std::uint32_t>(model.schedule.steps));
    for (double b : model.schedule.beta) payload.f64(b);
    payload.u32(static_cast<std::uint32_t>(model.data_dim));
    detail::write_mlp(payload, model.denoiser);
    return detail::container(detail::kKindDiffusion, payload.buf);
}

inline std::string serialize(const pipelines::BaselineDnn& dnn) {
    detail::ByteWriter payload;
    payload.f64(dnn.snr_min_db);
    payload.f64(dnn.snr_max_db);
    detail::write_mlp(payload, dnn.net);
    return detail::container(detail::kKindBaseline, payload.buf);
}

/// 16-hex-digit content hash of a model's serialized form; the same string
/// is embedded in checkpoint files and result metadata.
template <typename Model>
std::string model_checksum(const Model& model) {
    const std::string bytes = serialize(model);
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx",
                  static_cast<unsigned long long>(detail::fnv1a64(bytes)));
    return std::string(out, 16);
}

template <typename Model>
void save_checkpoint(const Model& model, const std::filesystem::path& path) {
    write_file_atomic(path, serialize(model));
}

inline diffusion::DiffusionModel load_ddpm_checkpoint(const std::filesystem::path& path) {
    const auto [kind, payload] = detail::open_container(read_file(path));
    if (kind != detail::kKindDiffusion)
        throw CorruptCheckpointError(path.string() + " is not a diffusion-model checkpoint");
    detail::ByteReader r{payload};
    diffusion::DiffusionModel model;
    const std::uint32_t steps = r.u32();
    if (steps < 2 || steps > (1u << 20)) throw CorruptCheckpointError("checkpoint: bad step count");
    model.schedule.steps = static_cast<int>(steps);
    model.schedule.beta.resize(steps);
    model.schedule.alpha.resize(steps);
    model.schedule.alpha_bar.resize(steps);
    double running = 1.0;
    for (std::uint32_t i = 0; i < steps; ++i) {
        model.schedule.beta[i] = r.f64();
        model.schedule.alpha[i] = 1.0 - model.schedule.beta[i];
        running *= model.schedule.alpha[i];
        model.schedule.alpha_bar[i] = running;
    }
    model.data_dim = static_cast<int>(r.u32());
    model.denoiser = detail::read_mlp(r);
    model.embedding = nn::TimeEmbedding(model.denoiser.embed_dim, model.schedule.steps);
    model.validate();
    return model;
}

inline pipelines::BaselineDnn load_baseline_checkpoint(const std::filesystem::path& path) {
    const auto [kind, payload] = detail::open_container(read_file(path));
    if (kind != detail::kKindBaseline)
        throw CorruptCheckpointError(path.string() + " is not a baseline checkpoint");
    detail::ByteReader r{payload};
    pipelines::BaselineDnn dnn;
    dnn.snr_min_db = r.f64();
    dnn.snr_max_db = r.f64();
    dnn.net = detail::read_mlp(r);
    if (!dnn.net.params_finite()) throw CorruptCheckpointError("checkpoint: non-finite parameters");
    return dnn;
}

}  // namespace diffphy::io
