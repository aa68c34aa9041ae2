#include <catch2/catch_amalgamated.hpp>

#include <bit>
#include <cmath>
#include <complex>
#include <random>
#include <set>

#include "diffphy/comms/channel.hpp"
#include "diffphy/comms/constellation.hpp"
#include "diffphy/comms/metrics.hpp"

using namespace diffphy;
using comms::BitVector;
using comms::build_qam;
using comms::cdouble;
using comms::ChannelKind;
using comms::ChannelModel;

TEST_CASE("4-QAM points sit at (+-1/sqrt2, +-1/sqrt2)") {
    const auto c = build_qam(4);
    const double v = 1.0 / std::sqrt(2.0);
    std::multiset<std::pair<double, double>> expected{{-v, -v}, {v, -v}, {-v, v}, {v, v}};
    for (const auto& p : c.points) {
        auto it = expected.find({p.real(), p.imag()});
        REQUIRE(it != expected.end());
        expected.erase(it);
    }
    REQUIRE(expected.empty());
    REQUIRE(c.points[0] == cdouble(-v, -v));  // index 0 is the bottom-left point
}

TEST_CASE("unit average energy for all orders") {
    for (int m : {4, 16, 64}) {
        const auto c = build_qam(m);
        REQUIRE(std::fabs(c.avg_energy() - 1.0) < 1e-12);
        REQUIRE(c.bits_per_symbol == static_cast<int>(std::log2(m)));
    }
    REQUIRE_THROWS_AS(build_qam(8), DomainError);
    REQUIRE_THROWS_AS(build_qam(2), DomainError);
}

TEST_CASE("labels are a Gray-coded permutation") {
    for (int m : {4, 16, 64}) {
        const auto c = build_qam(m);
        const int side = static_cast<int>(std::lround(std::sqrt(double(m))));

        std::set<std::uint32_t> seen(c.labels.begin(), c.labels.end());
        REQUIRE(static_cast<int>(seen.size()) == m);
        REQUIRE(*seen.rbegin() == static_cast<std::uint32_t>(m - 1));

        // Horizontally/vertically adjacent grid points differ in exactly 1 bit.
        for (int q = 0; q < side; ++q)
            for (int i = 0; i < side; ++i) {
                const int k = q * side + i;
                if (i + 1 < side)
                    REQUIRE(std::popcount(c.labels[k] ^ c.labels[k + 1]) == 1);
                if (q + 1 < side)
                    REQUIRE(std::popcount(c.labels[k] ^ c.labels[k + side]) == 1);
            }
    }
}

TEST_CASE("modulate: empty input, label inverse, round trip") {
    const auto c = build_qam(16);
    REQUIRE(comms::modulate({}, c).tx_indices.empty());

    for (int k = 0; k < 16; ++k) {
        BitVector bits;
        comms::append_label_bits(k, c, bits);
        const auto frame = comms::modulate(bits, c);
        REQUIRE(frame.tx_indices.size() == 1);
        REQUIRE(frame.tx_indices[0] == k);
        REQUIRE(frame.tx_symbols[0] == c.points[k]);
    }
    REQUIRE_THROWS_AS(comms::modulate(BitVector{1, 0, 1}, c), DomainError);
}

TEST_CASE("noiseless modulate/demap round-trips bits for all orders") {
    Rng rng(1);
    std::uniform_int_distribution<int> bit(0, 1);
    for (int m : {4, 16, 64}) {
        const auto c = build_qam(m);
        BitVector bits(c.bits_per_symbol * 257);
        for (auto& b : bits) b = static_cast<std::uint8_t>(bit(rng));
        const auto frame = comms::modulate(bits, c);
        const auto demapped = comms::demap_nearest(frame.tx_symbols, c);
        REQUIRE(demapped.bits == bits);
        REQUIRE(demapped.indices == frame.tx_indices);
    }
}

TEST_CASE("demap: exact points, origin tie-break") {
    const auto c4 = build_qam(4);
    for (int k = 0; k < 4; ++k)
        REQUIRE(comms::nearest_index(c4.points[k], c4) == k);
    // Origin is equidistant from all four points; lowest index wins.
    REQUIRE(comms::nearest_index(cdouble(0.0, 0.0), c4) == 0);
}

TEST_CASE("demap under 30 dB AWGN: symbol error rate below 1e-4") {
    const auto c = build_qam(16);
    Rng rng(7);
    std::uniform_int_distribution<int> sym(0, 15);
    comms::SymbolFrame frame;
    const long n = 1000000;
    frame.tx_indices.resize(n);
    frame.tx_symbols.resize(n);
    for (long i = 0; i < n; ++i) {
        frame.tx_indices[i] = sym(rng);
        frame.tx_symbols[i] = c.points[frame.tx_indices[i]];
    }
    comms::apply_channel(frame, {ChannelKind::Awgn, 30.0, 0.0}, rng);
    const auto demapped = comms::demap_nearest(frame.rx_symbols, c);
    long errors = 0;
    for (long i = 0; i < n; ++i)
        if (demapped.indices[i] != frame.tx_indices[i]) ++errors;
    REQUIRE(static_cast<double>(errors) / n < 1e-4);
}

TEST_CASE("awgn noise variance matches the SNR definition") {
    const auto c = build_qam(16);
    Rng rng(11);
    std::uniform_int_distribution<int> sym(0, 15);
    comms::SymbolFrame frame;
    const long n = 1000000;
    frame.tx_indices.resize(n);
    frame.tx_symbols.resize(n);
    for (long i = 0; i < n; ++i) {
        frame.tx_indices[i] = sym(rng);
        frame.tx_symbols[i] = c.points[frame.tx_indices[i]];
    }
    const auto tx_copy = frame.tx_symbols;
    comms::apply_channel(frame, {ChannelKind::Awgn, 0.0, 0.0}, rng);
    REQUIRE(frame.tx_symbols == tx_copy);  // tx fields untouched

    double power = 0.0;
    for (long i = 0; i < n; ++i) power += std::norm(frame.rx_symbols[i] - frame.tx_symbols[i]);
    REQUIRE(power / n == Catch::Approx(1.0).epsilon(0.01));
}

TEST_CASE("hardware impairment with kappa=0 equals plain awgn draw-for-draw") {
    const auto c = build_qam(16);
    comms::SymbolFrame a, b;
    for (int k = 0; k < 16; ++k) {
        a.tx_indices.push_back(k);
        a.tx_symbols.push_back(c.points[k]);
    }
    b = a;
    Rng rng_a(33), rng_b(33);
    comms::apply_channel(a, {ChannelKind::Awgn, -5.0, 0.0}, rng_a);
    comms::apply_channel(b, {ChannelKind::HardwareImpairedAwgn, -5.0, 0.0}, rng_b);
    REQUIRE(a.rx_symbols == b.rx_symbols);
}

TEST_CASE("hardware impairment adds kappa^2 distortion power") {
    const auto c = build_qam(16);
    Rng rng(101);
    std::uniform_int_distribution<int> sym(0, 15);
    comms::SymbolFrame frame;
    const long n = 1000000;
    frame.tx_indices.resize(n);
    frame.tx_symbols.resize(n);
    for (long i = 0; i < n; ++i) {
        frame.tx_indices[i] = sym(rng);
        frame.tx_symbols[i] = c.points[frame.tx_indices[i]];
    }
    const double kappa = 0.3;
    comms::apply_channel(frame, {ChannelKind::HardwareImpairedAwgn, 0.0, kappa}, rng);
    double power = 0.0;
    for (long i = 0; i < n; ++i) power += std::norm(frame.rx_symbols[i] - frame.tx_symbols[i]);
    REQUIRE(power / n == Catch::Approx(1.0 + kappa * kappa).epsilon(0.01));
}

TEST_CASE("laplacian noise: variance and per-quadrature excess kurtosis") {
    const auto c = build_qam(4);
    Rng rng(55);
    comms::SymbolFrame frame;
    const long n = 1000000;
    frame.tx_indices.assign(n, 0);
    frame.tx_symbols.assign(n, c.points[0]);
    comms::apply_channel(frame, {ChannelKind::Laplacian, 0.0, 0.0}, rng);

    double sum2 = 0.0, m2_re = 0.0, m4_re = 0.0;
    for (long i = 0; i < n; ++i) {
        const cdouble noise = frame.rx_symbols[i] - frame.tx_symbols[i];
        sum2 += std::norm(noise);
        const double x = noise.real();
        m2_re += x * x;
        m4_re += x * x * x * x;
    }
    REQUIRE(sum2 / n == Catch::Approx(1.0).epsilon(0.01));  // same total variance as AWGN
    const double kurt = (m4_re / n) / ((m2_re / n) * (m2_re / n)) - 3.0;
    REQUIRE(kurt == Catch::Approx(3.0).epsilon(0.10));  // Laplace excess kurtosis
}

TEST_CASE("compute_ber basics") {
    REQUIRE(comms::compute_ber({0, 1, 1, 0}, {0, 1, 1, 0}) == 0.0);
    REQUIRE(comms::compute_ber({0, 1, 1, 0}, {1, 0, 0, 1}) == 1.0);
    const BitVector tx{0, 0, 0, 0, 1, 1, 1, 1, 0, 1, 0, 1};
    BitVector rx = tx;
    rx[1] ^= 1;
    rx[6] ^= 1;
    rx[11] ^= 1;
    REQUIRE(comms::compute_ber(tx, rx) == Catch::Approx(0.25).epsilon(1e-15));
    REQUIRE_THROWS_AS(comms::compute_ber({}, {}), DomainError);
    REQUIRE_THROWS_AS(comms::compute_ber({0, 1}, {0}), DomainError);
}

TEST_CASE("ber of random guessing is one half") {
    Rng rng(77);
    std::uniform_int_distribution<int> bit(0, 1);
    const long n = 100000;
    BitVector tx(n), rx(n);
    for (long i = 0; i < n; ++i) {
        tx[i] = static_cast<std::uint8_t>(bit(rng));
        rx[i] = static_cast<std::uint8_t>(bit(rng));
    }
    const double sigma = std::sqrt(0.25 / n);
    REQUIRE(comms::compute_ber(tx, rx) == Catch::Approx(0.5).margin(3.0 * sigma));
}

TEST_CASE("mutual information: identity joint gives exactly log2 M bits") {
    for (int m : {4, 16, 64}) {
        comms::JointCounts counts = comms::JointCounts::Zero(m, m);
        for (int i = 0; i < m; ++i) counts(i, i) = 100;
        REQUIRE(comms::mutual_information(counts) == std::log2(static_cast<double>(m)));
    }
}

TEST_CASE("mutual information: independent joint gives zero") {
    const std::vector<std::int64_t> a{1, 3, 2}, b{2, 5, 1};
    comms::JointCounts counts(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) counts(i, j) = a[i] * b[j];
    REQUIRE(comms::mutual_information(counts) >= 0.0);
    REQUIRE(comms::mutual_information(counts) < 1e-12);
}

TEST_CASE("mutual information: binary 0.9/0.1 channel") {
    comms::JointCounts counts(2, 2);
    counts << 45, 5, 5, 45;  // (1/2) * [[0.9, 0.1], [0.1, 0.9]]
    const double hb = -(0.9 * std::log2(0.9) + 0.1 * std::log2(0.1));
    REQUIRE(comms::mutual_information(counts) == Catch::Approx(1.0 - hb).margin(1e-12));
    REQUIRE(comms::mutual_information(counts) == Catch::Approx(0.5310).margin(1e-3));
}

TEST_CASE("mutual information: domain errors") {
    REQUIRE_THROWS_AS(comms::mutual_information(comms::JointCounts::Zero(4, 4)), DomainError);
    comms::JointCounts bad(2, 2);
    bad << 1, 2, -1, 3;
    REQUIRE_THROWS_AS(comms::mutual_information(bad), DomainError);
}

TEST_CASE("mutual information bounds on random count matrices") {
    Rng rng(31);
    std::uniform_int_distribution<int> size(2, 8);
    std::uniform_int_distribution<std::int64_t> count(0, 50);
    for (int trial = 0; trial < 200; ++trial) {
        const int m = size(rng);
        comms::JointCounts counts(m, m);
        std::int64_t total = 0;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                counts(i, j) = count(rng);
                total += counts(i, j);
            }
        if (total == 0) counts(0, 0) = 1;
        const double info = comms::mutual_information(counts);
        REQUIRE(info >= 0.0);
        REQUIRE(info <= std::log2(static_cast<double>(m)) + 1e-12);

        Eigen::VectorXd row = Eigen::VectorXd::Zero(m);
        double sum = 0.0;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                row[i] += static_cast<double>(counts(i, j));
                sum += static_cast<double>(counts(i, j));
            }
        row /= sum;
        REQUIRE(info <= comms::entropy_bits(row) + 1e-12);
    }
}

TEST_CASE("entropy helper") {
    REQUIRE(comms::entropy_bits(Eigen::VectorXd::Constant(16, 1.0 / 16.0)) ==
            Catch::Approx(4.0).epsilon(1e-12));
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(8);
    delta[3] = 1.0;
    REQUIRE(comms::entropy_bits(delta) == 0.0);
}
