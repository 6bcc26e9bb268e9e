// Deterministic verification of the lattice convolution bounds: truncated
// two- and three-factor bracket sums with analytic tail bounds, and sweep
// reports of value-to-claimed-bound ratios.
#pragma once

#include <string>
#include <vector>

#include "wicklab/lattice.hpp"

namespace wicklab::counting {

struct SumReport {
    double value = 0.0;
    double tail_bound = 0.0;
    int d = 1;
    long radius = 0; // truncation |m|_inf <= R
};

// sum_{n1+n2=n, |n1|_inf <= R} <n1>^{-a} <n2>^{-b} plus a tail bound.
// Requires a + b > d, otherwise the sum diverges.
SumReport conv_sum2(int d, double a, double b, const FreqVec& n, long radius);

// sum_{|m|_inf <= R} <m>^{-a} <m+avec>^{-b} <m+bvec>^{-c} plus a tail bound.
// Requires a+2b > d, a+2c > d and a, 2b, 2c < d.
SumReport conv_sum3(int d, double a, double b, double c, const FreqVec& avec, const FreqVec& bvec,
                    long radius);

enum class SumCase { two_factor, three_factor };

struct SweepEntry {
    double target_bracket = 0.0; // <n> or <avec> of the tested point
    double value = 0.0;
    double bound = 0.0;
    double ratio = 0.0;
    double tail = 0.0;
};

struct SweepReport {
    std::vector<SweepEntry> entries;
    double sup_ratio = 0.0;
    bool monotone_growth_flag = false; // ratio strictly increasing across the top octave
};

// Case two_factor: targets n with <n> spanning [lo, hi], bound <n>^{d-a-b}.
// Case three_factor: diagonal sweep with <avec>=<bvec> spanning [lo, hi],
// bound <avec>^{d/2-a/2-b} <bvec>^{d/2-a/2-c}.
SweepReport conv_bound_sweep(SumCase which, int d, double a, double b, double c, double lo,
                             double hi, long radius);

// Computes sup_ratio and the top-octave growth flag from the entries.
void finalize_sweep(SweepReport& rep);

std::string sweep_csv(const SweepReport& r);

} // namespace wicklab::counting
