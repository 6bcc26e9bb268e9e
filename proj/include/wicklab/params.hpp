// The experiment parameter quintuple (d, k, alpha, beta, sigma) plus cutoff,
// horizon and seed, shared between the moment lab and the solver.
#pragma once

#include <cstdint>
#include <stdexcept>

namespace wicklab {

struct ParamSet {
    int d = 1;
    int k = 2;         // nonlinearity degree, >= 2 for the solver
    double alpha = 0.5;
    double beta = 0.4;
    int N = 32;
    double T = 0.25;
    double sigma = 0.2; // Sobolev index of the remainder class
    std::uint64_t seed = 0;

    bool singular_regime() const { return beta <= 0.5 * double(d); }
};

} // namespace wicklab
