// Spectral field representation on the cutoff box, Sobolev-type norms,
// alias-free pointwise products through oversampled physical grids, and the
// WLF1 snapshot format.
#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wicklab/lattice.hpp"

namespace wicklab {

using cplx = std::complex<double>;

struct SpectralField {
    Lattice lattice;
    std::vector<cplx> coeffs; // indexed by the lattice enumeration
    bool real_flag = false;

    SpectralField() = default;
    SpectralField(Lattice lat, bool real)
        : lattice(lat), coeffs(lat.size(), cplx(0.0, 0.0)), real_flag(real) {}

    cplx& at(const FreqVec& n) { return coeffs[lattice.index_of(n)]; }
    const cplx& at(const FreqVec& n) const { return coeffs[lattice.index_of(n)]; }

    // Coefficient lookup that treats frequencies outside the box as zero.
    cplx coeff_or_zero(const FreqVec& n) const {
        return lattice.contains(n) ? coeffs[lattice.index_of(n)] : cplx(0.0, 0.0);
    }
};

// Frames of one field over a strictly increasing time grid starting at 0.
struct SpacetimeField {
    std::vector<double> times;
    std::vector<SpectralField> frames;

    void validate() const;
};

// ( sum_n <n>^{2s} |f(n)|^2 )^{1/2} over the box.
double sobolev_norm(const SpectralField& f, double s);

// Checks conjugate symmetry coeffs(-n) == conj(coeffs(n)) exactly as stored.
bool has_conjugate_symmetry(const SpectralField& f);

// Throws if any coefficient is NaN/Inf.
void check_finite(const SpectralField& f, const std::string& what);

SpectralField zero_like(const SpectralField& f);

// Re-truncate to cutoff n_new <= lattice.N (drops outer modes) or embed into a
// larger box (pads with zeros).
SpectralField truncate(const SpectralField& f, int n_new);
SpectralField embed(const SpectralField& f, int n_new);

SpectralField add(const SpectralField& a, const SpectralField& b);
SpectralField sub(const SpectralField& a, const SpectralField& b);
SpectralField scale(const SpectralField& a, cplx s);

// Oversampled physical grid holding samples u(x_j), x_j = 2pi j / M per axis.
struct PhysGrid {
    int d = 1;
    std::size_t m = 1; // points per axis, power of two
    std::vector<cplx> data;
};

// Smallest power of two >= min_points per axis.
std::size_t grid_size_for(int degree, int side);

// u(x_j) = sum_n f(n) e^{i n . x_j} on an M^d grid, M >= 2N+1.
PhysGrid synthesize(const SpectralField& f, std::size_t m);

// Inverse of synthesize restricted to the box |n_i| <= cutoff; exact when the
// sample values come from a trigonometric polynomial of degree <= (m-1)/2.
SpectralField analyze(const PhysGrid& grid, int cutoff, bool real_flag);

// Exact spectral coefficients of the pointwise product of K fields sharing a
// lattice, on the enlarged box |n_i| <= K*N. Transforms on a physical grid of
// at least K*(2N+1) points per axis so no aliased mode lands in the result box.
SpectralField pointwise_product(std::span<const SpectralField> fs);
SpectralField pointwise_product(const std::vector<SpectralField>& fs);

// Product of fields with different cutoffs; result box is the sum of cutoffs.
SpectralField pointwise_product_mixed(std::span<const SpectralField> fs);

// --- WLF1 snapshot format ------------------------------------------------
// magic "WLF1", then little-endian u32 version=1, u32 d, u32 N, u8 real_flag,
// then (2N+1)^d coefficient pairs of 64-bit floats (re, im) in enumeration order.

std::vector<std::uint8_t> serialize_field(const SpectralField& f);
SpectralField deserialize_field(std::span<const std::uint8_t> bytes);

void write_field(const std::string& path, const SpectralField& f);
SpectralField read_field(const std::string& path);

struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace wicklab
