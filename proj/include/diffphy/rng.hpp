#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace diffphy {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; decorrelates nearby seed values.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Deterministic sub-seed for a work item addressed by `path` under a
/// master seed. Independent of evaluation order, so parallel workers can
/// derive their streams up front.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = mix64(master);
    for (std::uint64_t p : path) h = mix64(h ^ mix64(p));
    return h;
}

/// Stable 64-bit tag for a double-valued coordinate (e.g. an SNR grid point).
inline std::uint64_t seed_tag(double v) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    __builtin_memcpy(&bits, &v, sizeof(bits));
    return bits;
}

}  // namespace diffphy
