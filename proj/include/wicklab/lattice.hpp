// Frequency-lattice geometry on the torus: the cutoff box [-N,N]^d with a
// fixed lexicographic enumeration, and the Japanese bracket <n> = sqrt(1+|n|^2).
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace wicklab {

using FreqVec = std::vector<int>;

inline double bracket(const FreqVec& n) {
    double s = 1.0;
    for (int c : n) s += double(c) * double(c);
    return std::sqrt(s);
}

inline double bracket1(long long n) {
    return std::sqrt(1.0 + double(n) * double(n));
}

// Cutoff box {n in Z^d : |n_i| <= N}. The enumeration is lexicographic with
// the first coordinate most significant, so index_of(-n) == size()-1-index_of(n).
struct Lattice {
    int d = 1;
    int N = 0;

    Lattice() = default;
    Lattice(int d_, int N_) : d(d_), N(N_) {
        if (d < 1) throw std::invalid_argument("Lattice: dimension must be >= 1");
        if (N < 0) throw std::invalid_argument("Lattice: cutoff must be >= 0");
    }

    int side() const { return 2 * N + 1; }

    std::size_t size() const {
        std::size_t s = 1;
        for (int i = 0; i < d; ++i) s *= std::size_t(side());
        return s;
    }

    bool contains(const FreqVec& n) const {
        if (int(n.size()) != d) return false;
        for (int c : n)
            if (c < -N || c > N) return false;
        return true;
    }

    std::size_t index_of(const FreqVec& n) const {
        if (int(n.size()) != d) throw std::invalid_argument("Lattice: frequency dimension mismatch");
        std::size_t idx = 0;
        for (int i = 0; i < d; ++i) {
            if (n[i] < -N || n[i] > N) throw std::out_of_range("Lattice: frequency outside box");
            idx = idx * std::size_t(side()) + std::size_t(n[i] + N);
        }
        return idx;
    }

    FreqVec freq_at(std::size_t idx) const {
        FreqVec n(d);
        for (int i = d - 1; i >= 0; --i) {
            n[i] = int(idx % std::size_t(side())) - N;
            idx /= std::size_t(side());
        }
        return n;
    }

    // The map n -> -n as an index involution.
    std::size_t negate_index(std::size_t idx) const { return size() - 1 - idx; }

    // True for exactly one of {n, -n} when n != 0: first nonzero coordinate positive.
    bool in_half_lattice(const FreqVec& n) const {
        for (int c : n) {
            if (c > 0) return true;
            if (c < 0) return false;
        }
        return false; // n == 0
    }

    bool operator==(const Lattice& o) const { return d == o.d && N == o.N; }
    bool operator!=(const Lattice& o) const { return !(*this == o); }
};

// Precomputed |<n>| values over a lattice, indexed by the enumeration.
inline std::vector<double> bracket_table(const Lattice& lat) {
    std::vector<double> t(lat.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = bracket(lat.freq_at(i));
    return t;
}

} // namespace wicklab
