// Second-moment estimation for the stochastic objects: Monte Carlo
// estimators with deterministic parallel reduction, exact convolution
// oracles, coupled time-difference moments, dyadic power-law fits, and the
// product inequality / orthogonality checks.
#pragma once

#include <functional>
#include <optional>
#include <string>

#include "wicklab/chaos.hpp"
#include "wicklab/field.hpp"
#include "wicklab/params.hpp"
#include "wicklab/propagator.hpp"
#include "wicklab/stochastic.hpp"

namespace wicklab {

enum class ObjectKind { z, wick_power, duhamel_wick, product };

// One member of the object family: Z, :Z^ell:, I(:Z^k:), or
// :Z^{k1}: (I(:Z^k:))^{k2}.
struct ObjectSpec {
    ObjectKind kind = ObjectKind::z;
    int ell = 1; // wick power
    int k = 2;   // degree inside the Duhamel image
    int k1 = 0;
    int k2 = 0;
    ParamSet params;

    void validate() const;
    Lattice base_lattice() const { return Lattice(params.d, params.N); }
    // cutoff of the object's natural box
    int natural_cutoff() const;
    // chaos order of the object (top order for products)
    int chaos_order() const;
};

struct MomentEntry {
    bool is_shell = false;
    int shell = 0;
    FreqVec n;
    double estimate = 0.0;
    double stderr_ = 0.0; // 0 for exact-oracle entries
    long samples = 0;
};

struct MomentTable {
    std::vector<MomentEntry> entries;
};

struct Targets {
    std::vector<FreqVec> modes;
    std::vector<int> shells;
};

// shell j holds <n> in [2^j, 2^{j+1})
int shell_of(const FreqVec& n);
std::vector<FreqVec> shell_modes(int d, int cutoff, int shell);

// Fit window that discards the lowest two shells and any shell touching the
// cutoff boundary <n> > N/2.
std::pair<int, int> default_shell_range(int cutoff);

// --- exact oracles -----------------------------------------------------------

// E[|Z(n,t)|^2] = <n>^{-2 beta} on the box (time independent).
double exact_z_moment(const Lattice& lat, double beta, const FreqVec& n);

// ell! (w^{*ell})(n) with w(m) = <m>^{-2 beta} 1_box, by FFT-iterated
// convolution on the enlarged box; values for all |n_i| <= ell*N.
std::vector<double> exact_wick_moment_all(int ell, const Lattice& lat, double beta);
double exact_wick_moment(int ell, const Lattice& lat, double beta, const FreqVec& n);

// E[|I(:Z^k:)(n,t)|^2] by the product-to-sum expansion and closed-form double
// time integrals; exact up to the tuple sum, no quadrature.
double exact_duhamel_moment(int k, const Lattice& lat, double beta, double alpha, double t,
                            const FreqVec& n);
// the same via tensor quadrature (cross-check path)
double exact_duhamel_moment_quad(int k, const Lattice& lat, double beta, double alpha, double t,
                                 const FreqVec& n, const QuadratureRule& rule);

// closed-form E[|delta_h Z(n,t)|^2] = 2 <n>^{-2 beta} (1 - cos(h <n>^alpha))
double exact_z_delta_moment(const Lattice& lat, double beta, double alpha, double h,
                            const FreqVec& n);

// Build a shell-indexed exact table from a per-mode value function.
MomentTable shell_table(int d, int cutoff, int j_min, int j_max,
                        const std::function<double(const FreqVec&)>& value);

// --- Monte Carlo --------------------------------------------------------------

// Realize the object for one draw at time t (natural box).
SpectralField build_object(const ObjectSpec& spec, const GaussianDraw& draw, double t);

MomentTable mc_moment(const ObjectSpec& spec, double t, const Targets& targets, long samples,
                      std::uint64_t seed);

// Coupled-time increments: |X(n,t+h) - X(n,t)|^2 with the same realization.
MomentTable delta_moment(const ObjectSpec& spec, double t, double h, const Targets& targets,
                         long samples, std::uint64_t seed);

// --- fits -----------------------------------------------------------------------

struct ExponentFit {
    double slope = 0.0;
    double s0_hat = 0.0;
    double stderr_ = 0.0;
    int j_min = 0;
    int j_max = 0;
};

ExponentFit fit_exponent(const MomentTable& table, int d, int j_min, int j_max);

struct RegularityReport {
    double s0 = 0.0;                      // spatial claim: any s < s0
    std::optional<double> s_spacetime;    // s < s0 - sigma1/2 when a time fit exists
    std::string note; // Fourier-decay proxy label
};

RegularityReport regularity_report(const ExponentFit& fit,
                                   std::optional<std::pair<double, double>> time_fit);

// --- product checks --------------------------------------------------------------

struct RatioEntry {
    FreqVec n;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
};

struct RatioReport {
    std::vector<RatioEntry> entries;
    double sup = 0.0;
    double inf = 0.0;
};

// Top-chaos product moment against the convolution of factor moments,
// exact via the chaos engine; factors share the base lattice and time.
RatioReport product_bound_check(const std::vector<ObjectSpec>& factors, double t, int n_lo,
                                int n_hi);

struct DecompositionCheck {
    double full = 0.0;
    std::vector<double> projected; // per ell
    double residual = 0.0;
};

// |full moment - sum of chaos-projected moments| for a small product object.
DecompositionCheck chaos_decomposition_check(const std::vector<ObjectSpec>& factors, double t,
                                             const FreqVec& n, int duhamel_nodes = 24);

// --- CSV ------------------------------------------------------------------------

std::string moment_table_csv(const MomentTable& table);
MomentTable moment_table_from_csv(const std::string& text);

} // namespace wicklab
