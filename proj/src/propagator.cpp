#include "wicklab/propagator.hpp"

#include <cmath>

namespace wicklab {

namespace {

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_m.
void gauss_legendre(int m, std::vector<double>& x, std::vector<double>& w) {
    x.resize(std::size_t(m));
    w.resize(std::size_t(m));
    for (int i = 0; i < (m + 1) / 2; ++i) {
        double z = std::cos(M_PI * (double(i) + 0.75) / (double(m) + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < m; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - double(j) * p2) / double(j + 1);
            }
            pp = double(m) * (z * p0 - p1) / (z * z - 1.0);
            double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[std::size_t(i)] = -z;
        x[std::size_t(m - 1 - i)] = z;
        w[std::size_t(i)] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[std::size_t(m - 1 - i)] = w[std::size_t(i)];
    }
}

} // namespace

void QuadratureRule::points(double t, std::vector<double>& x, std::vector<double>& w) const {
    const int m = nodes;
    if (kind == QuadKind::trapezoid) {
        x.resize(std::size_t(m));
        w.assign(std::size_t(m), 0.0);
        const double h = t / double(m - 1);
        for (int i = 0; i < m; ++i) x[std::size_t(i)] = double(i) * h;
        for (int i = 0; i < m; ++i) w[std::size_t(i)] = (i == 0 || i == m - 1) ? h / 2.0 : h;
    } else {
        gauss_legendre(m, x, w);
        for (int i = 0; i < m; ++i) {
            x[std::size_t(i)] = 0.5 * t * (x[std::size_t(i)] + 1.0);
            w[std::size_t(i)] *= 0.5 * t;
        }
    }
}

double wave_kernel_br(double br, double t, double alpha) {
    double s = std::pow(br, alpha);
    return std::sin(t * s) / s;
}

double wave_kernel(const FreqVec& n, double t, double alpha) {
    return wave_kernel_br(bracket(n), t, alpha);
}

double wave_cos_br(double br, double t, double alpha) { return std::cos(t * std::pow(br, alpha)); }

double wave_cos(const FreqVec& n, double t, double alpha) {
    return wave_cos_br(bracket(n), t, alpha);
}

double time_covariance(const FreqVec& n, double t1, double t2, double alpha) {
    return std::cos((t1 - t2) * std::pow(bracket(n), alpha));
}

int duhamel_default_nodes(double t, double alpha, double bracket_max) {
    double rate = (8.0 / (2.0 * M_PI)) * t * std::pow(bracket_max, alpha);
    int m = int(std::ceil(rate));
    return std::max(16, m);
}

SpectralField duhamel(const SpacetimeField& f, double t, double alpha,
                      const QuadratureRule& rule) {
    f.validate();
    if (t < f.times.front() || t > f.times.back() + 1e-12)
        throw std::invalid_argument("duhamel: time outside the frame range");

    const Lattice& lat = f.frames.front().lattice;
    SpectralField out(lat, f.frames.front().real_flag);
    if (t <= 0.0) return out;

    std::vector<double> x, w;
    rule.points(t, x, w);

    // piecewise-linear interpolation weights per node
    struct Interp {
        std::size_t lo;
        double wlo, whi;
    };
    std::vector<Interp> interp(x.size());
    for (std::size_t q = 0; q < x.size(); ++q) {
        double tau = std::min(std::max(x[q], f.times.front()), f.times.back());
        std::size_t lo = 0;
        while (lo + 2 < f.times.size() && f.times[lo + 1] < tau) ++lo;
        double span = f.times[lo + 1] - f.times[lo];
        double a = (f.times[lo + 1] - tau) / span;
        interp[q] = {lo, a, 1.0 - a};
    }

    std::vector<double> br = bracket_table(lat);
    for (std::size_t i = 0; i < out.coeffs.size(); ++i) {
        double s = std::pow(br[i], alpha);
        cplx acc(0.0, 0.0);
        for (std::size_t q = 0; q < x.size(); ++q) {
            const Interp& ip = interp[q];
            cplx val = ip.wlo * f.frames[ip.lo].coeffs[i] + ip.whi * f.frames[ip.lo + 1].coeffs[i];
            acc += w[q] * (std::sin((t - x[q]) * s) / s) * val;
        }
        out.coeffs[i] = acc;
    }
    return out;
}

} // namespace wicklab
