#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "diffphy/errors.hpp"
#include "diffphy/io/file_io.hpp"
#include "diffphy/version.hpp"

namespace diffphy::io {

/// Fully-resolved experiment configuration. Every field has a default;
/// values come from an INI-style file plus command-line overrides.
struct RunConfig {
    // [run]
    std::string kind;  // subcommand that produced this config (echo only)
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    std::string checkpoint;           // DDPM checkpoint path
    std::string baseline_checkpoint;  // classifier checkpoint path
    bool plot = false;

    // [schedule]
    int schedule_steps = 100;
    double beta_start = 1e-4;
    double beta_end = 0.02;

    // [model]
    int hidden_width = 128;
    int hidden_layers = 3;
    int embed_dim = 128;

    // [training] (DDPM)
    long train_dataset_size = 100000;
    int train_batch_size = 256;
    int train_epochs = 30;
    double train_learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;

    // [baseline]
    long baseline_dataset_size = 200000;
    int baseline_batch_size = 256;
    int baseline_epochs = 20;
    double baseline_learning_rate = 1e-3;
    double baseline_snr_min_db = -25.0;
    double baseline_snr_max_db = -5.0;

    // [experiment]
    int m = 16;
    std::vector<double> snr_grid = {-25.0, -22.5, -20.0, -17.5, -15.0,
                                    -12.5, -10.0, -7.5, -5.0};
    double kappa = 0.1;
    long symbols_per_point = 50000;
    long mi_symbols_per_point = 100000;
    int sampling_runs = 10;
    long shaping_samples = 20000;
    double shape_snr_db = -5.0;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value, const char* type_name) {
    const std::string v = trim(value);
    std::size_t pos = 0;
    T out{};
    try {
        if constexpr (std::is_same_v<T, double>)
            out = std::stod(v, &pos);
        else if constexpr (std::is_same_v<T, long>)
            out = std::stol(v, &pos);
        else if constexpr (std::is_same_v<T, int>)
            out = std::stoi(v, &pos);
        else
            out = static_cast<T>(std::stoull(v, &pos));
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected " + type_name + ", got '" + v + "'");
    }
    if (pos != v.size())
        throw ConfigError("config key '" + key + "': expected " + type_name + ", got '" + v + "'");
    return out;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("config key '" + key + "': expected bool (true/false), got '" + v + "'");
}

}  // namespace detail

/// Expands an SNR grid spec: either "start:step:stop" (inclusive arithmetic
/// progression) or a comma-separated list of dB values.
inline std::vector<double> expand_snr_grid(const std::string& spec) {
    const std::string s = detail::trim(spec);
    if (s.empty()) throw ConfigError("snr grid: empty spec");
    std::vector<double> grid;
    // Count top-level colons; "a:b:c" has exactly two.
    const long colons = std::count(s.begin(), s.end(), ':');
    if (colons == 2) {
        const std::size_t c1 = s.find(':');
        const std::size_t c2 = s.find(':', c1 + 1);
        const double start = detail::parse_number<double>("snr_grid", s.substr(0, c1), "real");
        const double step = detail::parse_number<double>("snr_grid", s.substr(c1 + 1, c2 - c1 - 1), "real");
        const double stop = detail::parse_number<double>("snr_grid", s.substr(c2 + 1), "real");
        if (!(step > 0.0)) throw ConfigError("snr grid: step must be positive");
        if (stop < start) throw ConfigError("snr grid: stop must be >= start");
        const long n = std::lround((stop - start) / step) + 1;
        if (std::abs(start + (n - 1) * step - stop) > 1e-9)
            throw ConfigError("snr grid: step does not divide the range");
        for (long k = 0; k < n; ++k) grid.push_back(start + k * step);
        return grid;
    }
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        grid.push_back(detail::parse_number<double>("snr_grid", item, "real"));
    if (grid.empty()) throw ConfigError("snr grid: empty spec");
    return grid;
}

namespace detail {

struct ConfigBinding {
    std::string section;
    std::string key;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

inline const std::vector<ConfigBinding>& config_bindings() {
    static const std::vector<ConfigBinding> bindings = [] {
        std::vector<ConfigBinding> b;
        auto add = [&b](const std::string& section, const std::string& key, auto setter,
                        auto getter) {
            const std::string full = section + "." + key;
            b.push_back({section, key,
                         [setter, full](RunConfig& c, const std::string& v) { setter(c, full, v); },
                         getter});
        };
        auto add_num = [&](const std::string& sec, const std::string& key, auto field,
                           const char* type, auto format) {
            add(sec, key,
                [field, type](RunConfig& c, const std::string& full, const std::string& v) {
                    c.*field = parse_number<std::decay_t<decltype(std::declval<RunConfig>().*field)>>(
                        full, v, type);
                },
                [field, format](const RunConfig& c) { return format(c.*field); });
        };
        auto int_fmt = [](auto v) { return std::to_string(v); };
        auto dbl_fmt = [](double v) { return fmt_double(v); };

        add("run", "kind",
            [](RunConfig& c, const std::string&, const std::string& v) { c.kind = trim(v); },
            [](const RunConfig& c) { return c.kind; });
        add_num("run", "seed", &RunConfig::seed, "unsigned integer", int_fmt);
        add("run", "out_dir",
            [](RunConfig& c, const std::string&, const std::string& v) { c.out_dir = trim(v); },
            [](const RunConfig& c) { return c.out_dir; });
        add("run", "checkpoint",
            [](RunConfig& c, const std::string&, const std::string& v) { c.checkpoint = trim(v); },
            [](const RunConfig& c) { return c.checkpoint; });
        add("run", "baseline_checkpoint",
            [](RunConfig& c, const std::string&, const std::string& v) {
                c.baseline_checkpoint = trim(v);
            },
            [](const RunConfig& c) { return c.baseline_checkpoint; });
        add("run", "plot",
            [](RunConfig& c, const std::string& full, const std::string& v) {
                c.plot = parse_bool(full, v);
            },
            [](const RunConfig& c) { return std::string(c.plot ? "true" : "false"); });

        add_num("schedule", "steps", &RunConfig::schedule_steps, "integer", int_fmt);
        add_num("schedule", "beta_start", &RunConfig::beta_start, "real", dbl_fmt);
        add_num("schedule", "beta_end", &RunConfig::beta_end, "real", dbl_fmt);

        add_num("model", "hidden_width", &RunConfig::hidden_width, "integer", int_fmt);
        add_num("model", "hidden_layers", &RunConfig::hidden_layers, "integer", int_fmt);
        add_num("model", "embed_dim", &RunConfig::embed_dim, "integer", int_fmt);

        add_num("training", "dataset_size", &RunConfig::train_dataset_size, "integer", int_fmt);
        add_num("training", "batch_size", &RunConfig::train_batch_size, "integer", int_fmt);
        add_num("training", "epochs", &RunConfig::train_epochs, "integer", int_fmt);
        add_num("training", "learning_rate", &RunConfig::train_learning_rate, "real", dbl_fmt);
        add_num("training", "adam_beta1", &RunConfig::adam_beta1, "real", dbl_fmt);
        add_num("training", "adam_beta2", &RunConfig::adam_beta2, "real", dbl_fmt);
        add_num("training", "adam_epsilon", &RunConfig::adam_epsilon, "real", dbl_fmt);

        add_num("baseline", "dataset_size", &RunConfig::baseline_dataset_size, "integer", int_fmt);
        add_num("baseline", "batch_size", &RunConfig::baseline_batch_size, "integer", int_fmt);
        add_num("baseline", "epochs", &RunConfig::baseline_epochs, "integer", int_fmt);
        add_num("baseline", "learning_rate", &RunConfig::baseline_learning_rate, "real", dbl_fmt);
        add_num("baseline", "snr_min_db", &RunConfig::baseline_snr_min_db, "real", dbl_fmt);
        add_num("baseline", "snr_max_db", &RunConfig::baseline_snr_max_db, "real", dbl_fmt);

        add_num("experiment", "m", &RunConfig::m, "integer", int_fmt);
        add("experiment", "snr_grid",
            [](RunConfig& c, const std::string&, const std::string& v) {
                c.snr_grid = expand_snr_grid(v);
            },
            [](const RunConfig& c) {
                std::string out;
                for (std::size_t i = 0; i < c.snr_grid.size(); ++i) {
                    if (i) out += ",";
                    out += fmt_double(c.snr_grid[i]);
                }
                return out;
            });
        add_num("experiment", "kappa", &RunConfig::kappa, "real", dbl_fmt);
        add_num("experiment", "symbols_per_point", &RunConfig::symbols_per_point, "integer",
                int_fmt);
        add_num("experiment", "mi_symbols_per_point", &RunConfig::mi_symbols_per_point, "integer",
                int_fmt);
        add_num("experiment", "sampling_runs", &RunConfig::sampling_runs, "integer", int_fmt);
        add_num("experiment", "shaping_samples", &RunConfig::shaping_samples, "integer", int_fmt);
        add_num("experiment", "shape_snr_db", &RunConfig::shape_snr_db, "real", dbl_fmt);
        return b;
    }();
    return bindings;
}

inline const ConfigBinding* find_binding(const std::string& section, const std::string& key) {
    for (const auto& b : config_bindings())
        if (b.section == section && b.key == key) return &b;
    return nullptr;
}

}  // namespace detail

/// Applies one "section.key=value" override (used for CLI flags).
inline void apply_override(RunConfig& cfg, const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override '" + assignment + "' is not of the form key=value");
    const std::string full_key = detail::trim(assignment.substr(0, eq));
    const std::size_t dot = full_key.find('.');
    if (dot == std::string::npos)
        throw ConfigError("override key '" + full_key + "' must be section.key");
    const auto* binding = detail::find_binding(full_key.substr(0, dot), full_key.substr(dot + 1));
    if (binding == nullptr) throw ConfigError("unknown config key '" + full_key + "'");
    binding->set(cfg, assignment.substr(eq + 1));
}

/// Parses an INI-style config file on top of the documented defaults.
/// Unknown keys are hard errors (typo protection).
inline RunConfig parse_config(const std::filesystem::path& path) {
    RunConfig cfg;
    const std::string text = read_file(path);
    std::stringstream ss(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                                  ": malformed section header '" + t + "'");
            section = detail::trim(t.substr(1, t.size() - 2));
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": expected key = value, got '" + t + "'");
        const std::string key = detail::trim(t.substr(0, eq));
        const std::string value = t.substr(eq + 1);
        const auto* binding = detail::find_binding(section, key);
        if (binding == nullptr)
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": unknown config key '" +
                              (section.empty() ? key : section + "." + key) + "'");
        binding->set(cfg, value);
    }
    return cfg;
}

/// Serializes the fully-resolved config; parse_config() of the result
/// reproduces the config exactly.
inline std::string format_config(const RunConfig& cfg) {
    std::string out = "# resolved configuration (tool version " + std::string(kToolVersion) + ")\n";
    std::string section;
    for (const auto& b : detail::config_bindings()) {
        if (b.section != section) {
            section = b.section;
            out += "\n[" + section + "]\n";
        }
        out += b.key + " = " + b.get(cfg) + "\n";
    }
    return out;
}

inline void write_config_echo(const RunConfig& cfg, const std::filesystem::path& path) {
    write_file_atomic(path, format_config(cfg));
}

}  // namespace diffphy::io
