#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>

#include "diffphy/comms/constellation.hpp"
#include "diffphy/errors.hpp"

namespace diffphy::comms {

/// Fraction of differing bits (Hamming distance / length).
inline double compute_ber(const BitVector& tx_bits, const BitVector& rx_bits) {
    if (tx_bits.empty()) throw DomainError("compute_ber: empty bit streams");
    if (tx_bits.size() != rx_bits.size()) throw DomainError("compute_ber: length mismatch");
    std::size_t errors = 0;
    for (std::size_t i = 0; i < tx_bits.size(); ++i)
        if ((tx_bits[i] & 1u) != (rx_bits[i] & 1u)) ++errors;
    return static_cast<double>(errors) / static_cast<double>(tx_bits.size());
}

using JointCounts = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Plug-in mutual information estimate, in bits, from an empirical joint
/// count matrix (rows: transmitted index, columns: decoded index).
inline double mutual_information(const JointCounts& counts) {
    std::int64_t total = 0;
    for (Eigen::Index i = 0; i < counts.rows(); ++i)
        for (Eigen::Index j = 0; j < counts.cols(); ++j) {
            if (counts(i, j) < 0) throw DomainError("mutual_information: negative count");
            total += counts(i, j);
        }
    if (total == 0) throw DomainError("mutual_information: all-zero count matrix");

    const double n = static_cast<double>(total);
    Eigen::VectorXd row = Eigen::VectorXd::Zero(counts.rows());
    Eigen::VectorXd col = Eigen::VectorXd::Zero(counts.cols());
    for (Eigen::Index i = 0; i < counts.rows(); ++i)
        for (Eigen::Index j = 0; j < counts.cols(); ++j) {
            row[i] += static_cast<double>(counts(i, j)) / n;
            col[j] += static_cast<double>(counts(i, j)) / n;
        }
    double info = 0.0;
    for (Eigen::Index i = 0; i < counts.rows(); ++i)
        for (Eigen::Index j = 0; j < counts.cols(); ++j) {
            if (counts(i, j) == 0) continue;
            const double p = static_cast<double>(counts(i, j)) / n;
            info += p * std::log2(p / (row[i] * col[j]));
        }
    // The plug-in estimate is non-negative in exact arithmetic; clamp the
    // roundoff-sized negatives.
    return info < 0.0 ? 0.0 : info;
}

/// Shannon entropy of a probability vector, in bits.
inline double entropy_bits(const Eigen::VectorXd& probs) {
    double h = 0.0;
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
        if (probs[i] < 0.0) throw DomainError("entropy_bits: negative probability");
        if (probs[i] > 0.0) h -= probs[i] * std::log2(probs[i]);
    }
    return h;
}

}  // namespace diffphy::comms
