// Seeded Gaussian data on the torus, the random linear solution of the
// dispersion-generalized wave equation, the truncated variance, Hermite
// polynomials with a variance parameter, and Wick powers.
#pragma once

#include <cstdint>

#include "wicklab/field.hpp"

namespace wicklab {

// Two conjugate-symmetric complex Gaussian families over the box.
// Convention: for n in the half-lattice, Re and Im are independent N(0,1/2)
// so E|g(n)|^2 = 1; g(0) is real N(0,1); g(-n) = conj(g(n)).
struct GaussianDraw {
    Lattice lattice;
    std::uint64_t seed = 0;
    std::vector<cplx> g;
    std::vector<cplx> h;

    static GaussianDraw sample(const Lattice& lat, std::uint64_t seed);

    // Build from explicit arrays (forced draws in tests); validates symmetry.
    static GaussianDraw from_arrays(const Lattice& lat, std::vector<cplx> g, std::vector<cplx> h);
};

struct WickSpec {
    int ell = 1;     // power
    double sigma = 0.0; // variance parameter

    WickSpec(int ell_, double sigma_) : ell(ell_), sigma(sigma_) {
        if (ell < 1) throw std::invalid_argument("WickSpec: power must be >= 1");
        if (sigma < 0.0) throw std::invalid_argument("WickSpec: variance must be >= 0");
    }
};

// Random initial data: u0(n) = g(n)/<n>^beta, u1(n) = h(n)/<n>^{beta-alpha}.
struct InitialData {
    SpectralField u0;
    SpectralField u1;
    GaussianDraw draw;
};

InitialData sample_initial_data(const Lattice& lat, double beta, double alpha, std::uint64_t seed);

// Z(n,t) = (cos(t<n>^alpha) g(n) + sin(t<n>^alpha) h(n)) / <n>^beta.
SpectralField linear_solution(const GaussianDraw& draw, double beta, double alpha, double t);

// sigma_N = sum over the box of <n>^{-2 beta}.
double cutoff_variance(const Lattice& lat, double beta);

// Hermite polynomial with variance parameter via the three-term recurrence
// H_{k+1} = x H_k - k sigma H_{k-1}, H_0 = 1, H_1 = x.
double hermite(int k, double x, double sigma);

// H_ell(Z(x); sigma) evaluated pointwise on a dealiased grid; the result
// lives on the enlarged box ell*N.
SpectralField wick_power(const SpectralField& z, const WickSpec& spec);

} // namespace wicklab
