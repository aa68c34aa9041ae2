#pragma once

#include <Eigen/Core>
#include <cmath>

#include "diffphy/errors.hpp"

namespace diffphy::nn {

/// Sinusoidal timestep embedding, transformer-style: entry 2k is
/// sin(t * w_k), entry 2k+1 is cos(t * w_k) with w_k = 10000^(-2k/dim).
/// Every entry lies in [-1, 1].
struct TimeEmbedding {
    int dim = 0;           // even, > 0
    int max_timestep = 0;  // > 0

    TimeEmbedding() = default;
    TimeEmbedding(int dim_, int max_timestep_) : dim(dim_), max_timestep(max_timestep_) {
        if (dim <= 0 || dim % 2 != 0)
            throw DomainError("TimeEmbedding: dim must be a positive even integer");
        if (max_timestep <= 0)
            throw DomainError("TimeEmbedding: max_timestep must be positive");
    }
};

/// Embeds integer timestep t. t = 0 is allowed as the unconditioned
/// baseline (all-sin entries 0, all-cos entries 1).
inline Eigen::VectorXd sinusoidal_embed(int t, const TimeEmbedding& emb) {
    if (t < 0 || t > emb.max_timestep)
        throw DomainError("sinusoidal_embed: timestep " + std::to_string(t) +
                          " outside [0, " + std::to_string(emb.max_timestep) + "]");
    Eigen::VectorXd out(emb.dim);
    const int half = emb.dim / 2;
    for (int k = 0; k < half; ++k) {
        const double freq = std::pow(10000.0, -2.0 * k / emb.dim);
        out[2 * k] = std::sin(t * freq);
        out[2 * k + 1] = std::cos(t * freq);
    }
    return out;
}

}  // namespace diffphy::nn
