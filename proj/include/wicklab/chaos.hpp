// Exact Wiener-chaos combinatorics over finite symbol sets: pairing
// enumeration, Isserlis moments, decomposition of products of Wick blocks
// into chaos components, chaos covariances via permanents, and the
// hypercontractivity ratio check. Everything here is deterministic and
// exact; this module is the ground-truth oracle for the estimators.
#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <vector>

#include "wicklab/lattice.hpp"

namespace wicklab::chaos {

using cplx = std::complex<double>;

// A finite family of jointly Gaussian complex symbols. kernel(a,b) is the
// plain pairing moment E[xi_a xi_b] (symmetric, no conjugate); conj_id maps a
// symbol to the one representing its complex conjugate. bucket_key is a
// sparsity hint: E[xi_a conj(xi_b)] == 0 whenever keys differ.
struct SymbolSpace {
    virtual ~SymbolSpace() = default;
    virtual int size() const = 0;
    virtual cplx kernel(int a, int b) const = 0;
    virtual int conj_id(int a) const = 0;
    virtual std::int64_t bucket_key(int) const { return 0; }
};

// Dense symmetric kernel with an explicit conjugation permutation
// (identity = real symbols).
struct MatrixSymbolSpace : SymbolSpace {
    std::vector<std::vector<cplx>> k;
    std::vector<int> conj_perm;

    explicit MatrixSymbolSpace(std::vector<std::vector<cplx>> kernel_matrix,
                               std::vector<int> conj = {});

    int size() const override { return int(k.size()); }
    cplx kernel(int a, int b) const override { return k[std::size_t(a)][std::size_t(b)]; }
    int conj_id(int a) const override { return conj_perm[std::size_t(a)]; }
};

// Mode oscillators of the wave flow: symbols tagged by (frequency, time).
// E[xi_{n,t1} xi_{m,t2}] = 1_{n+m=0} cos((t1-t2) <n>^alpha) and
// conj(xi_{n,t}) = xi_{-n,t}.
struct ModeSymbolSpace : SymbolSpace {
    explicit ModeSymbolSpace(double alpha_) : alpha(alpha_) {}

    // registers (freq,time) and its negation; returns the symbol id
    int add_mode(const FreqVec& freq, double time);

    int size() const override { return int(freqs.size()); }
    cplx kernel(int a, int b) const override;
    int conj_id(int a) const override { return conj_ids[std::size_t(a)]; }
    std::int64_t bucket_key(int a) const override { return packed[std::size_t(a)]; }

    double alpha;
    std::vector<FreqVec> freqs;
    std::vector<double> times;
    std::vector<double> omega; // <freq>^alpha
    std::vector<std::int64_t> packed;
    std::vector<int> conj_ids;
    std::map<std::pair<std::int64_t, double>, int> index;
};

std::int64_t pack_freq(const FreqVec& n);

// --- pairings ---------------------------------------------------------------

// A partial matching on {0,...,J-1}: anti-reflexive, symmetric, univalent,
// stored as sorted pairs (i,j) with i < j.
struct Pairing {
    int j_total = 0;
    std::vector<std::pair<int, int>> pairs;
};

using Partition = std::vector<std::vector<int>>;

Partition singleton_partition(int j_total);

// All pairings with exactly ell pairs, none inside a partition block,
// in a fixed deterministic order. Throws on overlapping/gapped partitions.
std::vector<Pairing> enumerate_pairings(int j_total, const Partition& blocks, int ell);

// --- moments ----------------------------------------------------------------

struct GaussianMonomial {
    std::vector<int> symbols; // ids into the space, repeats allowed
    const SymbolSpace* space = nullptr;
};

// E[prod xi_i] as the sum over perfect matchings of products of pair moments;
// zero for an odd number of factors. Memoized over symbol multiplicities.
cplx isserlis(const GaussianMonomial& m);

// Expectation of a product of Wick-ordered blocks: the sum over perfect
// matchings that never pair two factors of the same block.
cplx wick_block_moment(const std::vector<std::vector<int>>& blocks, const SymbolSpace& space);

// --- chaos components --------------------------------------------------------

struct WickMonomial {
    cplx w;
    std::vector<int> symbols; // sorted
};

struct WickComponent {
    int order = 0;
    std::vector<WickMonomial> terms;
    const SymbolSpace* space = nullptr;
};

// Decomposition of prod_j :block_j: into chaos components, one per number of
// contracted pairs ell = 0..floor(K/2). With singleton blocks this is the
// classical decomposition of a plain Gaussian monomial.
std::vector<WickComponent> wick_decompose(const GaussianMonomial& m, const Partition& blocks);

// E[A conj(B)]: zero across different orders; within an order, complete
// matchings between the two blocks (permanent of the cross-kernel matrix).
cplx chaos_covariance(const WickComponent& a, const WickComponent& b);

// Permanent via Ryser's formula.
cplx permanent(const std::vector<std::vector<cplx>>& m);

// ||X||_{L^p} / ||X||_{L^2} computed exactly from Gaussian moments of the
// expanded p-fold product; p must be even.
double hyper_check(const WickComponent& x, int p);

// --- sums of products of Wick blocks (exact product objects) ----------------

struct BlockTerm {
    cplx w;
    std::vector<std::vector<int>> blocks;
};

using BlockSum = std::vector<BlockTerm>;

// E[|sum_T w_T prod_j :block_j(T):|^2], computed with plain partition-
// respecting Gaussian moments; independent of any chaos projection.
double full_moment(const BlockSum& bs, const SymbolSpace& space);

// The chaos component with K-2*ell factors of the same sum of products.
WickComponent project_block_sum(const BlockSum& bs, int ell, const SymbolSpace& space);

} // namespace wicklab::chaos
