#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "diffphy/errors.hpp"

namespace diffphy::comms {

using cdouble = std::complex<double>;

/// Square M-QAM grid with per-axis Gray labeling, normalized to unit
/// average energy. Point k sits at grid position (k % side, k / side),
/// bottom-left first.
struct Constellation {
    int order = 0;            // M
    int bits_per_symbol = 0;  // log2 M
    std::vector<cdouble> points;
    std::vector<std::uint32_t> labels;   // labels[k] = Gray label of point k
    std::vector<int> index_of_label;     // inverse permutation

    double avg_energy() const {
        double s = 0.0;
        for (const auto& p : points) s += std::norm(p);
        return s / static_cast<double>(order);
    }
};

namespace detail {

inline std::uint32_t gray_code(std::uint32_t i) { return i ^ (i >> 1); }

}  // namespace detail

inline Constellation build_qam(int m) {
    if (m != 4 && m != 16 && m != 64)
        throw DomainError("build_qam: unsupported order " + std::to_string(m));
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(m))));
    int side_bits = 0;
    while ((1 << side_bits) < side) ++side_bits;

    Constellation c;
    c.order = m;
    c.bits_per_symbol = 2 * side_bits;
    c.points.resize(m);
    c.labels.resize(m);
    c.index_of_label.assign(m, -1);

    double energy = 0.0;
    for (int q = 0; q < side; ++q) {
        for (int i = 0; i < side; ++i) {
            const int k = q * side + i;
            const double re = 2.0 * i - (side - 1);
            const double im = 2.0 * q - (side - 1);
            c.points[k] = cdouble(re, im);
            c.labels[k] = (detail::gray_code(static_cast<std::uint32_t>(i)) << side_bits) |
                          detail::gray_code(static_cast<std::uint32_t>(q));
            energy += re * re + im * im;
        }
    }
    const double scale = 1.0 / std::sqrt(energy / m);
    for (auto& p : c.points) p *= scale;
    for (int k = 0; k < m; ++k) c.index_of_label[c.labels[k]] = k;
    return c;
}

/// Transmit-side view of a symbol stream plus (after apply_channel) the
/// received samples.
struct SymbolFrame {
    std::vector<int> tx_indices;
    std::vector<cdouble> tx_symbols;
    std::vector<cdouble> rx_symbols;
};

using BitVector = std::vector<std::uint8_t>;

/// Maps consecutive log2(M)-bit groups (MSB first) through the Gray
/// labels onto constellation points.
inline SymbolFrame modulate(const BitVector& bits, const Constellation& c) {
    if (bits.size() % c.bits_per_symbol != 0)
        throw DomainError("modulate: bit count " + std::to_string(bits.size()) +
                          " not divisible by " + std::to_string(c.bits_per_symbol));
    SymbolFrame frame;
    const std::size_t n = bits.size() / c.bits_per_symbol;
    frame.tx_indices.reserve(n);
    frame.tx_symbols.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
        std::uint32_t label = 0;
        for (int b = 0; b < c.bits_per_symbol; ++b)
            label = (label << 1) | (bits[s * c.bits_per_symbol + b] & 1u);
        const int idx = c.index_of_label[label];
        frame.tx_indices.push_back(idx);
        frame.tx_symbols.push_back(c.points[idx]);
    }
    return frame;
}

/// Appends the label bits of point index `idx`, MSB first.
inline void append_label_bits(int idx, const Constellation& c, BitVector& out) {
    const std::uint32_t label = c.labels[idx];
    for (int b = c.bits_per_symbol - 1; b >= 0; --b)
        out.push_back(static_cast<std::uint8_t>((label >> b) & 1u));
}

struct DemapResult {
    std::vector<int> indices;
    BitVector bits;
};

/// Minimum Euclidean distance decision; ties break to the lowest index.
inline int nearest_index(cdouble rx, const Constellation& c) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int k = 0; k < c.order; ++k) {
        const double d = std::norm(rx - c.points[k]);
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    return best;
}

inline DemapResult demap_nearest(const std::vector<cdouble>& rx_symbols, const Constellation& c) {
    DemapResult out;
    out.indices.reserve(rx_symbols.size());
    out.bits.reserve(rx_symbols.size() * c.bits_per_symbol);
    for (const auto& rx : rx_symbols) {
        const int k = nearest_index(rx, c);
        out.indices.push_back(k);
        append_label_bits(k, c, out.bits);
    }
    return out;
}

}  // namespace diffphy::comms
