#pragma once

#include <cmath>

#include "diffphy/comms/constellation.hpp"
#include "diffphy/errors.hpp"
#include "diffphy/rng.hpp"

namespace diffphy::comms {

enum class ChannelKind { Awgn, Laplacian, HardwareImpairedAwgn };

inline const char* channel_name(ChannelKind kind) {
    switch (kind) {
        case ChannelKind::Awgn: return "awgn";
        case ChannelKind::Laplacian: return "laplacian";
        case ChannelKind::HardwareImpairedAwgn: return "hwi";
    }
    return "?";
}

/// Additive channel at a given SNR. Unit average transmit energy is
/// assumed, so the total complex noise power is 10^(-snr_db/10). kappa is
/// the aggregate transceiver distortion level used by the
/// hardware-impaired variant; kappa = 0 reduces it to plain AWGN.
struct ChannelModel {
    ChannelKind kind = ChannelKind::Awgn;
    double snr_db = 0.0;
    double kappa = 0.0;

    double noise_power() const { return std::pow(10.0, -snr_db / 10.0); }

    /// Noise plus distortion power seen by the receiver.
    double effective_noise_power() const {
        double p = noise_power();
        if (kind == ChannelKind::HardwareImpairedAwgn) p += kappa * kappa;
        return p;
    }
    double effective_snr_db() const { return -10.0 * std::log10(effective_noise_power()); }
};

namespace detail {

/// Per-quadrature Laplace draw with the requested scale b (variance 2b^2).
inline double laplace(double scale, Rng& rng) {
    std::uniform_real_distribution<double> dist(-0.5, 0.5);
    double u;
    do {
        u = dist(rng);
    } while (u == -0.5);
    const double sgn = (u >= 0.0) ? 1.0 : -1.0;
    return -scale * sgn * std::log1p(-2.0 * std::abs(u));
}

}  // namespace detail

/// Fills frame.rx_symbols; tx fields are left untouched.
///   Awgn:       rx = tx + n,  n complex Gaussian, total variance sigma^2
///   Laplacian:  rx = tx + l,  i.i.d. per-quadrature Laplace, same total variance
///   HardwareImpairedAwgn: rx = tx + d + n, d complex Gaussian with variance kappa^2
inline void apply_channel(SymbolFrame& frame, const ChannelModel& ch, Rng& rng) {
    const double sigma2 = ch.noise_power();
    const double per_quad_std = std::sqrt(sigma2 / 2.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    frame.rx_symbols.resize(frame.tx_symbols.size());
    switch (ch.kind) {
        case ChannelKind::Awgn:
            for (std::size_t i = 0; i < frame.tx_symbols.size(); ++i)
                frame.rx_symbols[i] = frame.tx_symbols[i] +
                                      cdouble(per_quad_std * normal(rng), per_quad_std * normal(rng));
            break;
        case ChannelKind::Laplacian: {
            // Scale b = sigma/2 gives per-quadrature variance sigma^2/2.
            const double b = std::sqrt(sigma2) / 2.0;
            for (std::size_t i = 0; i < frame.tx_symbols.size(); ++i)
                frame.rx_symbols[i] = frame.tx_symbols[i] +
                                      cdouble(detail::laplace(b, rng), detail::laplace(b, rng));
            break;
        }
        case ChannelKind::HardwareImpairedAwgn: {
            const double dist_std = ch.kappa / std::sqrt(2.0);
            for (std::size_t i = 0; i < frame.tx_symbols.size(); ++i) {
                cdouble v = frame.tx_symbols[i];
                if (ch.kappa > 0.0) v += cdouble(dist_std * normal(rng), dist_std * normal(rng));
                frame.rx_symbols[i] =
                    v + cdouble(per_quad_std * normal(rng), per_quad_std * normal(rng));
            }
            break;
        }
    }
}

}  // namespace diffphy::comms
