// Counter-based splittable RNG. Every draw is a pure hash of
// (seed, purpose tag, frequency coordinates, counter), so sampling is
// independent of iteration order and thread scheduling, and draws for a mode
// n agree across lattices of different cutoff (nested coupling).
#pragma once

#include <cstdint>
#include <initializer_list>

#include "wicklab/lattice.hpp"

namespace wicklab::rng {

inline std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t combine(std::uint64_t h, std::uint64_t v) { return mix(h ^ mix(v)); }

inline std::uint64_t hash_fields(std::initializer_list<std::uint64_t> vs) {
    std::uint64_t h = 0x5851f42d4c957f2dULL;
    for (std::uint64_t v : vs) h = combine(h, v);
    return h;
}

inline std::uint64_t zigzag(int v) {
    return std::uint64_t((std::uint32_t(v) << 1) ^ std::uint32_t(v >> 31));
}

// uniform in (0,1]; never 0, so log() is safe
inline double to_unit(std::uint64_t v) { return double((v >> 11) + 1) * 0x1.0p-53; }

// Box-Muller pair of independent N(0,1) draws from a key
inline void normal_pair(std::uint64_t key, double& n1, double& n2) {
    double u1 = to_unit(mix(key ^ 0xa5a5a5a5a5a5a5a5ULL));
    double u2 = to_unit(mix(key ^ 0x3c3c3c3c3c3c3c3cULL));
    double r = std::sqrt(-2.0 * std::log(u1));
    n1 = r * std::cos(2.0 * M_PI * u2);
    n2 = r * std::sin(2.0 * M_PI * u2);
}

// Key for one lattice mode: hashes the frequency coordinates themselves
// (not the enumeration index), so draws couple across cutoffs.
inline std::uint64_t mode_key(std::uint64_t seed, std::uint64_t tag, const FreqVec& n) {
    std::uint64_t h = hash_fields({seed, tag, std::uint64_t(n.size())});
    for (int c : n) h = combine(h, zigzag(c));
    return h;
}

} // namespace wicklab::rng
