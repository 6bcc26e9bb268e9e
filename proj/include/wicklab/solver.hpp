// Parameter admissibility for the remainder equation, assembly of the
// stochastic forcing family, the Picard fixed-point solver in the discrete
// C_T H^sigma norm, the direct truncated solver with a trigonometric
// integrator, the second-order decomposition consistency check, and
// N-convergence studies with nested coupling.
#pragma once

#include <map>
#include <optional>
#include <string>

#include "wicklab/moments.hpp"
#include "wicklab/params.hpp"
#include "wicklab/propagator.hpp"
#include "wicklab/stochastic.hpp"

namespace wicklab {

// Which admissibility inequality failed, named by its role.
enum class RejectReason {
    none,
    dispersion_vs_degree,        // alpha > (k-1)(d/2 - (k-1)beta/k)
    dispersion_vs_degree_strong, // k >= 3: alpha > (k-1)d/2 - (k^2-3k+3)beta/(k-1)
    beta_range,                  // max(d/2 - d/2k, d/2 - alpha/2k) < beta <= d/2
    empty_sigma_window
};

struct Admissibility {
    bool admissible = false;
    RejectReason reason = RejectReason::none;
    std::string detail;
    double sigma_lo = 0.0; // open window (sigma_lo, sigma_hi)
    double sigma_hi = 0.0;
    double sigma_default = 0.0; // midpoint
};

Admissibility admissible_params(int d, int k, double alpha, double beta);

struct ForcingFamily {
    // (k1,k2) -> frames of :Z^{k1}: (I(:Z^k:))^{k2} truncated to the base box
    std::map<std::pair<int, int>, SpacetimeField> objects;
    std::vector<double> times;
    double norm_z = 0.0;
    ParamSet params;
};

// One realization of the whole family on a uniform grid of `steps` intervals
// over [0, T]. Products are computed alias-free and re-truncated to the base
// box, so the second-order decomposition holds exactly in the spatially
// truncated system.
ForcingFamily build_forcing(const ParamSet& params, int steps);

struct SolverReport {
    std::vector<double> iterate_norms;
    std::vector<double> contraction_ratios;
    bool converged = false;
    double final_residual = 0.0;
    int iterations = 0;
};

struct PicardResult {
    SpacetimeField v;
    SolverReport report;
};

// v^{m+1} = Phi(v^m) with trapezoid Duhamel quadrature on the forcing grid.
PicardResult picard_solve(const ForcingFamily& forcing, const ParamSet& params, double tol,
                          int max_iter = 50);

// Direct integration of the renormalized truncated equation with a
// Gautschi-type trigonometric step (exact linear flow, midpoint nonlinearity).
// nonlinearity_off integrates the free flow only (test hook).
SpacetimeField solve_truncated(const ParamSet& params, int steps, bool nonlinearity_off = false);

struct DecompositionResidual {
    std::vector<int> steps;
    std::vector<double> residuals; // || u_N - (Z_N - I(:Z_N^k:) + v_N) || per level
};

// Residuals across `levels` successive grid refinements starting at
// `base_steps` intervals.
DecompositionResidual decomposition_check(const ParamSet& params, int base_steps, int levels);

struct ConvergenceStudy {
    std::vector<int> cutoffs;
    std::vector<double> diff_norms; // ||v_{next} - v_N|| in discrete C_T H^sigma
    std::vector<double> rates;      // log2 ratios
    bool sigma_in_window = true;
    std::string csv;
};

ConvergenceStudy convergence_study(const ParamSet& params, const std::vector<int>& cutoffs,
                                   int steps);

// Multinomial coefficients k!/(k1!k2!k3!) over k1+k2+k3 = k with k1 <= k-1.
struct ForcingTriple {
    int k1, k2, k3;
    double coeff;
};
std::vector<ForcingTriple> forcing_triples(int k);

} // namespace wicklab
