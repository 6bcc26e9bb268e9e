// Per-mode symbols of the dispersion-generalized wave propagator, quadrature
// rules for the Duhamel integral, and the exact time covariance of the mode
// oscillators.
#pragma once

#include "wicklab/field.hpp"

namespace wicklab {

enum class QuadKind { gauss_legendre, trapezoid };

struct QuadratureRule {
    QuadKind kind = QuadKind::trapezoid;
    int nodes = 16;

    QuadratureRule() = default;
    QuadratureRule(QuadKind k, int m) : kind(k), nodes(m) {
        if (m < 2) throw std::invalid_argument("QuadratureRule: need at least 2 nodes");
    }

    // nodes/weights on [0, t]
    void points(double t, std::vector<double>& x, std::vector<double>& w) const;
};

// sin(t <n>^alpha) / <n>^alpha
double wave_kernel(const FreqVec& n, double t, double alpha);
double wave_kernel_br(double br, double t, double alpha);

// cos(t <n>^alpha), the companion symbol of the linear evolution
double wave_cos(const FreqVec& n, double t, double alpha);
double wave_cos_br(double br, double t, double alpha);

// E[ mode(t1) conj mode(t2) ] = cos((t1 - t2) <n>^alpha) under unit-variance draws
double time_covariance(const FreqVec& n, double t1, double t2, double alpha);

// Default node count: at least 8 nodes per period of the fastest oscillation
// exp(i t <n_max>^alpha), never fewer than 16.
int duhamel_default_nodes(double t, double alpha, double bracket_max);

// Per-mode quadrature of int_0^t sin((t-tau)<n>^alpha)/<n>^alpha F(n,tau) dtau,
// with F piecewise-linear in time between frames.
SpectralField duhamel(const SpacetimeField& f, double t, double alpha, const QuadratureRule& rule);

} // namespace wicklab
