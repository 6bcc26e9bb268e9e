#include "wicklab/stochastic.hpp"

#include <cmath>

#include "wicklab/rng.hpp"

namespace wicklab {

namespace {

constexpr std::uint64_t kTagG = 0x67; // 'g'
constexpr std::uint64_t kTagH = 0x68; // 'h'

std::vector<cplx> sample_family(const Lattice& lat, std::uint64_t seed, std::uint64_t tag) {
    std::vector<cplx> out(lat.size(), cplx(0.0, 0.0));
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        FreqVec n = lat.freq_at(i);
        bool zero = true;
        for (int c : n) zero = zero && (c == 0);
        if (zero) {
            double a, b;
            rng::normal_pair(rng::mode_key(seed, tag, n), a, b);
            out[i] = cplx(a, 0.0);
        } else if (lat.in_half_lattice(n)) {
            double a, b;
            rng::normal_pair(rng::mode_key(seed, tag, n), a, b);
            out[i] = cplx(a * inv_sqrt2, b * inv_sqrt2);
            out[lat.negate_index(i)] = std::conj(out[i]);
        }
    }
    return out;
}

} // namespace

GaussianDraw GaussianDraw::sample(const Lattice& lat, std::uint64_t seed) {
    GaussianDraw d;
    d.lattice = lat;
    d.seed = seed;
    d.g = sample_family(lat, seed, kTagG);
    d.h = sample_family(lat, seed, kTagH);
    return d;
}

GaussianDraw GaussianDraw::from_arrays(const Lattice& lat, std::vector<cplx> g,
                                       std::vector<cplx> h) {
    if (g.size() != lat.size() || h.size() != lat.size())
        throw std::invalid_argument("GaussianDraw: array sizes do not match the lattice");
    GaussianDraw d;
    d.lattice = lat;
    d.g = std::move(g);
    d.h = std::move(h);
    const std::size_t sz = d.g.size();
    for (std::size_t i = 0; i < sz; ++i) {
        if (d.g[i] != std::conj(d.g[sz - 1 - i]) || d.h[i] != std::conj(d.h[sz - 1 - i]))
            throw std::invalid_argument("GaussianDraw: arrays are not conjugate-symmetric");
    }
    return d;
}

InitialData sample_initial_data(const Lattice& lat, double beta, double alpha,
                                std::uint64_t seed) {
    InitialData out{SpectralField(lat, true), SpectralField(lat, true),
                    GaussianDraw::sample(lat, seed)};
    for (std::size_t i = 0; i < lat.size(); ++i) {
        double br = bracket(lat.freq_at(i));
        out.u0.coeffs[i] = out.draw.g[i] * std::pow(br, -beta);
        out.u1.coeffs[i] = out.draw.h[i] * std::pow(br, -(beta - alpha));
    }
    return out;
}

SpectralField linear_solution(const GaussianDraw& draw, double beta, double alpha, double t) {
    const Lattice& lat = draw.lattice;
    SpectralField z(lat, true);
    for (std::size_t i = 0; i < lat.size(); ++i) {
        double br = bracket(lat.freq_at(i));
        double w = std::pow(br, alpha);
        double damp = std::pow(br, -beta);
        z.coeffs[i] = (std::cos(t * w) * draw.g[i] + std::sin(t * w) * draw.h[i]) * damp;
    }
    return z;
}

double cutoff_variance(const Lattice& lat, double beta) {
    double s = 0.0;
    for (std::size_t i = 0; i < lat.size(); ++i)
        s += std::pow(bracket(lat.freq_at(i)), -2.0 * beta);
    return s;
}

double hermite(int k, double x, double sigma) {
    if (k < 0) throw std::invalid_argument("hermite: degree must be >= 0");
    if (k == 0) return 1.0;
    double hm1 = 1.0;
    double h = x;
    for (int j = 1; j < k; ++j) {
        double hp1 = x * h - double(j) * sigma * hm1;
        hm1 = h;
        h = hp1;
    }
    return h;
}

SpectralField wick_power(const SpectralField& z, const WickSpec& spec) {
    if (!z.real_flag) throw std::invalid_argument("wick_power: field must be real");
    const Lattice& lat = z.lattice;
    if (spec.ell == 1) return z;

    const std::size_t m = grid_size_for(spec.ell, lat.side());
    PhysGrid grid = synthesize(z, m);
    for (cplx& v : grid.data) v = cplx(hermite(spec.ell, v.real(), spec.sigma), 0.0);
    return analyze(grid, spec.ell * lat.N, true);
}

} // namespace wicklab
