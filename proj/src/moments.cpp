#include "wicklab/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "wicklab/fft.hpp"
#include "wicklab/parallel.hpp"
#include "wicklab/rng.hpp"

namespace wicklab {

void ObjectSpec::validate() const {
    switch (kind) {
    case ObjectKind::z:
        break;
    case ObjectKind::wick_power:
        if (ell < 1) throw std::invalid_argument("ObjectSpec: wick power needs ell >= 1");
        break;
    case ObjectKind::duhamel_wick:
        if (k < 1) throw std::invalid_argument("ObjectSpec: Duhamel image needs k >= 1");
        break;
    case ObjectKind::product:
        if (k < 1 || k1 < 0 || k2 < 0 || k1 > k - 1 || k2 > k)
            throw std::invalid_argument("ObjectSpec: product needs 0 <= k1 <= k-1, 0 <= k2 <= k");
        break;
    }
}

int ObjectSpec::natural_cutoff() const {
    switch (kind) {
    case ObjectKind::z:
        return params.N;
    case ObjectKind::wick_power:
        return ell * params.N;
    case ObjectKind::duhamel_wick:
        return k * params.N;
    case ObjectKind::product:
        return (k1 + k * k2) * params.N;
    }
    return params.N;
}

int ObjectSpec::chaos_order() const {
    switch (kind) {
    case ObjectKind::z:
        return 1;
    case ObjectKind::wick_power:
        return ell;
    case ObjectKind::duhamel_wick:
        return k;
    case ObjectKind::product:
        return k1 + k * k2;
    }
    return 1;
}

int shell_of(const FreqVec& n) { return int(std::floor(std::log2(bracket(n)))); }

std::vector<FreqVec> shell_modes(int d, int cutoff, int shell) {
    Lattice lat(d, cutoff);
    std::vector<FreqVec> out;
    for (std::size_t i = 0; i < lat.size(); ++i) {
        FreqVec n = lat.freq_at(i);
        if (shell_of(n) == shell) out.push_back(std::move(n));
    }
    return out;
}

std::pair<int, int> default_shell_range(int cutoff) {
    int j_max = int(std::floor(std::log2(cutoff / 2.0))) - 1;
    return {2, j_max};
}

// --- exact oracles -----------------------------------------------------------

double exact_z_moment(const Lattice& lat, double beta, const FreqVec& n) {
    if (!lat.contains(n)) return 0.0;
    return std::pow(bracket(n), -2.0 * beta);
}

std::vector<double> exact_wick_moment_all(int ell, const Lattice& lat, double beta) {
    if (ell < 1) throw std::invalid_argument("exact_wick_moment: ell >= 1");
    const int d = lat.d;
    const Lattice big(d, ell * lat.N);

    // weights on a power-of-two circular grid large enough for the ell-fold
    // linear convolution of the box
    const std::size_t m = fft::next_pow2(std::size_t(ell) * std::size_t(lat.side()));
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) total *= m;

    std::vector<cplx> w(total, cplx(0.0, 0.0));
    for (std::size_t i = 0; i < lat.size(); ++i) {
        FreqVec n = lat.freq_at(i);
        std::size_t idx = 0;
        for (int kk = 0; kk < d; ++kk) {
            long long wrap = ((long long)n[kk] % (long long)m + (long long)m) % (long long)m;
            idx = idx * m + std::size_t(wrap);
        }
        w[idx] = cplx(std::pow(bracket(n), -2.0 * beta), 0.0);
    }

    fft::transform_nd(w.data(), d, m, -1);
    std::vector<cplx> acc = w;
    for (int p = 1; p < ell; ++p)
        for (std::size_t i = 0; i < total; ++i) acc[i] *= w[i];
    fft::transform_nd(acc.data(), d, m, +1);
    double inv = 1.0;
    for (int i = 0; i < d; ++i) inv /= double(m);

    double fact = 1.0;
    for (int j = 2; j <= ell; ++j) fact *= double(j);

    std::vector<double> out(big.size());
    for (std::size_t i = 0; i < big.size(); ++i) {
        FreqVec n = big.freq_at(i);
        std::size_t idx = 0;
        for (int kk = 0; kk < d; ++kk) {
            long long wrap = ((long long)n[kk] % (long long)m + (long long)m) % (long long)m;
            idx = idx * m + std::size_t(wrap);
        }
        out[i] = fact * acc[idx].real() * inv;
    }
    return out;
}

double exact_wick_moment(int ell, const Lattice& lat, double beta, const FreqVec& n) {
    const Lattice big(lat.d, ell * lat.N);
    if (!big.contains(n)) return 0.0;
    // direct tuple sum for small boxes, FFT for large ones
    if (ell == 1) return exact_z_moment(lat, beta, n);
    auto all = exact_wick_moment_all(ell, lat, beta);
    return all[big.index_of(n)];
}

namespace {

// sin(c t)/c and (1 - cos(c t))/c with stable small-argument branches
inline double f_sin_over(double c, double t) {
    if (std::abs(c * t) < 1e-6) {
        double ct = c * t;
        return t * (1.0 - ct * ct / 6.0);
    }
    return std::sin(c * t) / c;
}

inline double f_one_minus_cos_over(double c, double t) {
    if (std::abs(c * t) < 1e-6) {
        double ct = c * t;
        return c * t * t * 0.5 * (1.0 - ct * ct / 12.0);
    }
    return (1.0 - std::cos(c * t)) / c;
}

// D1(omega) = (A^2 + B^2)/s^2 with
//   A = int_0^t sin(s(t-tau)) cos(omega tau) dtau
//   B = int_0^t sin(s(t-tau)) sin(omega tau) dtau
double duhamel_cos_integral(double s, double omega, double t, double cos_st, double sin_st) {
    auto eye = [&](double c) { return -cos_st * f_one_minus_cos_over(c, t) + sin_st * f_sin_over(c, t); };
    auto jay = [&](double c) { return sin_st * f_one_minus_cos_over(c, t) + cos_st * f_sin_over(c, t); };
    double a = 0.5 * (eye(s - omega) + eye(s + omega));
    double b = 0.5 * (jay(s + omega) - jay(s - omega));
    return (a * a + b * b) / (s * s);
}

// iterate ordered (k-1)-tuples over the box; the last frequency is determined
template <typename Fn>
void for_each_tuple(const Lattice& lat, const FreqVec& n, int k, Fn&& fn) {
    const int d = lat.d;
    std::vector<FreqVec> tuple(static_cast<std::size_t>(k), FreqVec(static_cast<std::size_t>(d), 0));
    std::vector<std::size_t> idx(std::size_t(k - 1), 0);
    const std::size_t sz = lat.size();

    for (;;) {
        FreqVec last(static_cast<std::size_t>(d), 0);
        for (int c = 0; c < d; ++c) last[std::size_t(c)] = n[std::size_t(c)];
        for (int j = 0; j < k - 1; ++j) {
            tuple[std::size_t(j)] = lat.freq_at(idx[std::size_t(j)]);
            for (int c = 0; c < d; ++c) last[std::size_t(c)] -= tuple[std::size_t(j)][std::size_t(c)];
        }
        if (lat.contains(last)) {
            tuple[std::size_t(k - 1)] = last;
            fn(tuple);
        }
        int j = k - 2;
        for (; j >= 0; --j) {
            if (++idx[std::size_t(j)] < sz) break;
            idx[std::size_t(j)] = 0;
        }
        if (j < 0) break;
    }
}

} // namespace

double exact_duhamel_moment(int k, const Lattice& lat, double beta, double alpha, double t,
                            const FreqVec& n) {
    if (k < 1) throw std::invalid_argument("exact_duhamel_moment: k >= 1");
    if (t <= 0.0) return 0.0;

    const double s = std::pow(bracket(n), alpha);
    const double cos_st = std::cos(s * t);
    const double sin_st = std::sin(s * t);
    const double half_pow = std::pow(0.5, k - 1);

    double fact = 1.0;
    for (int j = 2; j <= k; ++j) fact *= double(j);

    double acc = 0.0;
    for_each_tuple(lat, n, k, [&](const std::vector<FreqVec>& tuple) {
        double weight = 1.0;
        std::vector<double> omega(static_cast<std::size_t>(k));
        for (int j = 0; j < k; ++j) {
            double br = bracket(tuple[std::size_t(j)]);
            weight *= std::pow(br, -2.0 * beta);
            omega[std::size_t(j)] = std::pow(br, alpha);
        }
        // product-to-sum: average D1 over sign vectors with the first sign +
        double dsum = 0.0;
        const int combos = 1 << (k - 1);
        for (int mask = 0; mask < combos; ++mask) {
            double om = omega[0];
            for (int j = 1; j < k; ++j) om += ((mask >> (j - 1)) & 1) ? -omega[std::size_t(j)] : omega[std::size_t(j)];
            dsum += duhamel_cos_integral(s, om, t, cos_st, sin_st);
        }
        acc += weight * half_pow * dsum;
    });
    return fact * acc;
}

double exact_duhamel_moment_quad(int k, const Lattice& lat, double beta, double alpha, double t,
                                 const FreqVec& n, const QuadratureRule& rule) {
    if (t <= 0.0) return 0.0;
    std::vector<double> x, w;
    rule.points(t, x, w);
    const double s = std::pow(bracket(n), alpha);

    double fact = 1.0;
    for (int j = 2; j <= k; ++j) fact *= double(j);

    double acc = 0.0;
    for_each_tuple(lat, n, k, [&](const std::vector<FreqVec>& tuple) {
        double weight = 1.0;
        std::vector<double> omega(static_cast<std::size_t>(k));
        for (int j = 0; j < k; ++j) {
            double br = bracket(tuple[std::size_t(j)]);
            weight *= std::pow(br, -2.0 * beta);
            omega[std::size_t(j)] = std::pow(br, alpha);
        }
        double dbl = 0.0;
        for (std::size_t q1 = 0; q1 < x.size(); ++q1)
            for (std::size_t q2 = 0; q2 < x.size(); ++q2) {
                double prod = 1.0;
                for (int j = 0; j < k; ++j) prod *= std::cos((x[q1] - x[q2]) * omega[std::size_t(j)]);
                dbl += w[q1] * w[q2] * (std::sin((t - x[q1]) * s) / s) *
                       (std::sin((t - x[q2]) * s) / s) * prod;
            }
        acc += weight * dbl;
    });
    return fact * acc;
}

double exact_z_delta_moment(const Lattice& lat, double beta, double alpha, double h,
                            const FreqVec& n) {
    if (!lat.contains(n)) return 0.0;
    double br = bracket(n);
    return 2.0 * std::pow(br, -2.0 * beta) * (1.0 - std::cos(h * std::pow(br, alpha)));
}

MomentTable shell_table(int d, int cutoff, int j_min, int j_max,
                        const std::function<double(const FreqVec&)>& value) {
    MomentTable table;
    for (int j = j_min; j <= j_max; ++j) {
        auto modes = shell_modes(d, cutoff, j);
        if (modes.empty()) continue;
        double mean = 0.0;
        for (const auto& n : modes) mean += value(n);
        mean /= double(modes.size());
        MomentEntry e;
        e.is_shell = true;
        e.shell = j;
        e.estimate = mean;
        e.stderr_ = 0.0;
        e.samples = long(modes.size());
        table.entries.push_back(std::move(e));
    }
    return table;
}

// --- Monte Carlo ----------------------------------------------------------------

SpectralField build_object(const ObjectSpec& spec, const GaussianDraw& draw, double t) {
    spec.validate();
    const ParamSet& p = spec.params;
    const Lattice lat = spec.base_lattice();

    switch (spec.kind) {
    case ObjectKind::z:
        return linear_solution(draw, p.beta, p.alpha, t);
    case ObjectKind::wick_power: {
        SpectralField z = linear_solution(draw, p.beta, p.alpha, t);
        return wick_power(z, WickSpec(spec.ell, cutoff_variance(lat, p.beta)));
    }
    case ObjectKind::duhamel_wick: {
        if (t <= 0.0) return SpectralField(Lattice(p.d, spec.k * p.N), true);
        const double sigma_n = cutoff_variance(lat, p.beta);
        const int nodes =
            duhamel_default_nodes(t, p.alpha, bracket(FreqVec(std::size_t(p.d), spec.k * p.N)));
        SpacetimeField frames;
        frames.times.resize(std::size_t(nodes));
        frames.frames.reserve(std::size_t(nodes));
        for (int i = 0; i < nodes; ++i) {
            double tau = t * double(i) / double(nodes - 1);
            frames.times[std::size_t(i)] = tau;
            SpectralField z = linear_solution(draw, p.beta, p.alpha, tau);
            frames.frames.push_back(wick_power(z, WickSpec(spec.k, sigma_n)));
        }
        return duhamel(frames, t, p.alpha, QuadratureRule(QuadKind::trapezoid, nodes));
    }
    case ObjectKind::product: {
        std::vector<SpectralField> factors;
        if (spec.k1 >= 1) {
            ObjectSpec w = spec;
            w.kind = ObjectKind::wick_power;
            w.ell = spec.k1;
            factors.push_back(build_object(w, draw, t));
        }
        if (spec.k2 >= 1) {
            ObjectSpec dj = spec;
            dj.kind = ObjectKind::duhamel_wick;
            SpectralField i_field = build_object(dj, draw, t);
            for (int c = 0; c < spec.k2; ++c) factors.push_back(i_field);
        }
        if (factors.empty()) {
            SpectralField one(Lattice(p.d, 0), true);
            one.coeffs[0] = cplx(1.0, 0.0);
            return one;
        }
        if (factors.size() == 1) return factors[0];
        return pointwise_product_mixed(
            std::span<const SpectralField>(factors.data(), factors.size()));
    }
    }
    throw std::logic_error("build_object: unknown kind");
}

namespace {

constexpr long kBatchSize = 256;

struct TargetList {
    // flattened list: modes first, then shells
    std::vector<FreqVec> modes;
    std::vector<int> shells;
    std::vector<std::vector<FreqVec>> shell_members;
};

TargetList resolve_targets(const ObjectSpec& spec, const Targets& t) {
    TargetList out;
    out.modes = t.modes;
    out.shells = t.shells;
    for (int j : t.shells)
        out.shell_members.push_back(shell_modes(spec.params.d, spec.natural_cutoff(), j));
    return out;
}

MomentTable run_mc(const ObjectSpec& spec, const TargetList& targets, long samples,
                   std::uint64_t seed,
                   const std::function<SpectralField(const GaussianDraw&)>& realize) {
    if (samples < 2) throw std::invalid_argument("mc_moment: need at least 2 samples");
    const std::size_t n_tgt = targets.modes.size() + targets.shells.size();
    const long batches = (samples + kBatchSize - 1) / kBatchSize;

    std::vector<std::vector<Accumulator>> per_batch(static_cast<std::size_t>(batches),
                                                    std::vector<Accumulator>(n_tgt));
    const Lattice lat = spec.base_lattice();

    parallel_batches(batches, [&](long b) {
        std::uint64_t batch_seed = rng::hash_fields({seed, 0x6261746368ULL, std::uint64_t(b)});
        auto& acc = per_batch[std::size_t(b)];
        const long lo = b * kBatchSize;
        const long hi = std::min(samples, lo + kBatchSize);
        for (long s = lo; s < hi; ++s) {
            std::uint64_t sample_seed = rng::hash_fields({batch_seed, std::uint64_t(s - lo)});
            GaussianDraw draw = GaussianDraw::sample(lat, sample_seed);
            SpectralField x = realize(draw);
            std::size_t ti = 0;
            for (const auto& n : targets.modes) acc[ti++].add(std::norm(x.coeff_or_zero(n)));
            for (std::size_t sj = 0; sj < targets.shells.size(); ++sj) {
                const auto& members = targets.shell_members[sj];
                double v = 0.0;
                for (const auto& n : members) v += std::norm(x.coeff_or_zero(n));
                acc[ti++].add(members.empty() ? 0.0 : v / double(members.size()));
            }
        }
    });

    std::vector<Accumulator> total(n_tgt);
    for (long b = 0; b < batches; ++b)
        for (std::size_t i = 0; i < n_tgt; ++i) total[i].merge(per_batch[std::size_t(b)][i]);

    MomentTable table;
    std::size_t ti = 0;
    for (const auto& n : targets.modes) {
        MomentEntry e;
        e.is_shell = false;
        e.n = n;
        e.estimate = total[ti].mean;
        e.stderr_ = total[ti].stderr_of_mean();
        e.samples = total[ti].count;
        table.entries.push_back(std::move(e));
        ++ti;
    }
    for (std::size_t sj = 0; sj < targets.shells.size(); ++sj) {
        MomentEntry e;
        e.is_shell = true;
        e.shell = targets.shells[sj];
        e.estimate = total[ti].mean;
        e.stderr_ = total[ti].stderr_of_mean();
        e.samples = total[ti].count;
        table.entries.push_back(std::move(e));
        ++ti;
    }
    return table;
}

} // namespace

MomentTable mc_moment(const ObjectSpec& spec, double t, const Targets& targets, long samples,
                      std::uint64_t seed) {
    spec.validate();
    TargetList tl = resolve_targets(spec, targets);
    return run_mc(spec, tl, samples, seed,
                  [&](const GaussianDraw& d) { return build_object(spec, d, t); });
}

MomentTable delta_moment(const ObjectSpec& spec, double t, double h, const Targets& targets,
                         long samples, std::uint64_t seed) {
    spec.validate();
    if (t < 0.0 || t + h < 0.0)
        throw std::invalid_argument("delta_moment: need t >= 0 and t + h >= 0");
    TargetList tl = resolve_targets(spec, targets);
    return run_mc(spec, tl, samples, seed, [&](const GaussianDraw& d) {
        SpectralField a = build_object(spec, d, t);
        SpectralField b = build_object(spec, d, t + h);
        return sub(b, a);
    });
}

// --- fits --------------------------------------------------------------------------

ExponentFit fit_exponent(const MomentTable& table, int d, int j_min, int j_max) {
    std::vector<double> xs, ys, ws;
    std::vector<int> shells_seen;
    for (const auto& e : table.entries) {
        if (e.estimate <= 0.0) continue;
        int j = e.is_shell ? e.shell : shell_of(e.n);
        if (j < j_min || j > j_max) continue;
        double center = e.is_shell ? std::exp2(double(e.shell) + 0.5) : bracket(e.n);
        xs.push_back(std::log(center));
        ys.push_back(std::log(e.estimate));
        // weight by inverse variance of log(estimate)
        double w = 1.0;
        if (e.stderr_ > 0.0) {
            double rel = e.stderr_ / e.estimate;
            w = 1.0 / (rel * rel);
        }
        ws.push_back(w);
        shells_seen.push_back(j);
    }
    std::sort(shells_seen.begin(), shells_seen.end());
    shells_seen.erase(std::unique(shells_seen.begin(), shells_seen.end()), shells_seen.end());
    if (shells_seen.size() < 3)
        throw std::runtime_error("fit_exponent: fewer than 3 usable shells");

    double sw = 0.0, sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sw += ws[i];
        sx += ws[i] * xs[i];
        sy += ws[i] * ys[i];
    }
    double xbar = sx / sw, ybar = sy / sw;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += ws[i] * (xs[i] - xbar) * (xs[i] - xbar);
        sxy += ws[i] * (xs[i] - xbar) * (ys[i] - ybar);
    }
    if (sxx <= 0.0) throw std::runtime_error("fit_exponent: degenerate abscissas");
    double slope = sxy / sxx;

    double rss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double r = ys[i] - ybar - slope * (xs[i] - xbar);
        rss += ws[i] * r * r;
    }
    double dof = double(xs.size() >= 3 ? xs.size() - 2 : 1);
    double se = std::sqrt(std::max(rss, 0.0) / dof / sxx);

    ExponentFit fit;
    fit.slope = slope;
    fit.s0_hat = (-slope - double(d)) / 2.0;
    fit.stderr_ = se;
    fit.j_min = shells_seen.front();
    fit.j_max = shells_seen.back();
    return fit;
}

RegularityReport regularity_report(const ExponentFit& fit,
                                   std::optional<std::pair<double, double>> time_fit) {
    RegularityReport r;
    r.s0 = fit.s0_hat;
    if (time_fit) r.s_spacetime = fit.s0_hat - 0.5 * time_fit->first;
    r.note = "Fourier-decay proxy for sup-norm regularity";
    return r;
}

// --- product checks ------------------------------------------------------------------

namespace {

struct FactorShape {
    int degree = 1;       // number of Gaussian symbols
    bool duhamel = false; // integrate the block against the wave kernel
    int k_inner = 1;      // degree inside the Duhamel image
};

FactorShape factor_shape(const ObjectSpec& f) {
    switch (f.kind) {
    case ObjectKind::z:
        return {1, false, 1};
    case ObjectKind::wick_power:
        return {f.ell, false, 1};
    case ObjectKind::duhamel_wick:
        return {f.k, true, f.k};
    case ObjectKind::product:
        throw std::invalid_argument("product factors must be simple objects");
    }
    return {1, false, 1};
}

// Build the product object at output frequency n as a sum of products of Wick
// blocks over an explicit symbol space. Duhamel factors are discretized by
// Gauss-Legendre nodes in time, turning each into a finite sum of blocks.
chaos::BlockSum build_product_blocksum(const std::vector<ObjectSpec>& factors, double t,
                                       const FreqVec& n, chaos::ModeSymbolSpace& space,
                                       int duhamel_nodes) {
    if (factors.empty()) throw std::invalid_argument("product check: no factors");
    const ParamSet& p = factors[0].params;
    const Lattice lat(p.d, p.N);

    std::vector<FactorShape> shapes;
    int total_degree = 0;
    for (const auto& f : factors) {
        shapes.push_back(factor_shape(f));
        total_degree += shapes.back().degree;
    }

    std::vector<double> qx, qw;
    bool any_duhamel = false;
    for (const auto& s : shapes) any_duhamel = any_duhamel || s.duhamel;
    if (any_duhamel) {
        QuadratureRule rule(QuadKind::gauss_legendre, duhamel_nodes);
        rule.points(t, qx, qw);
    }

    chaos::BlockSum bs;
    for_each_tuple(lat, n, total_degree, [&](const std::vector<FreqVec>& tuple) {
        double cweight = 1.0;
        for (const auto& m : tuple) cweight *= std::pow(bracket(m), -p.beta);

        // blocks of consecutive tuple slots, one per factor
        struct BlockPlan {
            std::size_t lo, hi;
            bool duhamel;
            FreqVec sum;
        };
        std::vector<BlockPlan> plan;
        std::size_t pos = 0;
        for (const auto& s : shapes) {
            BlockPlan bp;
            bp.lo = pos;
            bp.hi = pos + std::size_t(s.degree);
            bp.duhamel = s.duhamel;
            bp.sum.assign(std::size_t(p.d), 0);
            for (std::size_t i = bp.lo; i < bp.hi; ++i)
                for (int c = 0; c < p.d; ++c) bp.sum[std::size_t(c)] += tuple[i][std::size_t(c)];
            pos = bp.hi;
            plan.push_back(std::move(bp));
        }

        // expand over quadrature node choices of the Duhamel blocks
        std::vector<std::size_t> dcount;
        for (const auto& bp : plan)
            if (bp.duhamel) dcount.push_back(qx.size());
        std::vector<std::size_t> qidx(dcount.size(), 0);

        for (;;) {
            chaos::BlockTerm term;
            term.w = cplx(cweight, 0.0);
            std::size_t dslot = 0;
            for (const auto& bp : plan) {
                double btime = t;
                if (bp.duhamel) {
                    std::size_t q = qidx[dslot];
                    btime = qx[q];
                    double s_sym = std::pow(bracket(bp.sum), factors[0].params.alpha);
                    term.w *= qw[q] * std::sin((t - qx[q]) * s_sym) / s_sym;
                    ++dslot;
                }
                std::vector<int> blk;
                for (std::size_t i = bp.lo; i < bp.hi; ++i)
                    blk.push_back(space.add_mode(tuple[i], btime));
                term.blocks.push_back(std::move(blk));
            }
            bs.push_back(std::move(term));

            // odometer over quadrature choices
            if (qidx.empty()) break;
            std::size_t j = qidx.size();
            for (; j > 0; --j) {
                if (++qidx[j - 1] < dcount[j - 1]) break;
                qidx[j - 1] = 0;
            }
            if (j == 0) break;
        }
    });
    return bs;
}

double factor_moment(const ObjectSpec& f, double t, const FreqVec& n) {
    const ParamSet& p = f.params;
    const Lattice lat(p.d, p.N);
    switch (f.kind) {
    case ObjectKind::z:
        return exact_z_moment(lat, p.beta, n);
    case ObjectKind::wick_power:
        return exact_wick_moment(f.ell, lat, p.beta, n);
    case ObjectKind::duhamel_wick:
        return exact_duhamel_moment(f.k, lat, p.beta, p.alpha, t, n);
    case ObjectKind::product:
        throw std::invalid_argument("factor_moment: nested products unsupported");
    }
    return 0.0;
}

} // namespace

RatioReport product_bound_check(const std::vector<ObjectSpec>& factors, double t, int n_lo,
                                int n_hi) {
    if (factors.empty()) throw std::invalid_argument("product_bound_check: no factors");
    const ParamSet& p = factors[0].params;
    if (p.d != 1) throw std::invalid_argument("product_bound_check: exact route is d=1");
    for (const auto& f : factors) f.validate();

    // factor moment arrays on their natural boxes
    std::vector<std::vector<double>> fmoms;
    std::vector<Lattice> fboxes;
    for (const auto& f : factors) {
        Lattice box(p.d, f.natural_cutoff());
        std::vector<double> vals(box.size());
        for (std::size_t i = 0; i < box.size(); ++i) vals[i] = factor_moment(f, t, box.freq_at(i));
        fmoms.push_back(std::move(vals));
        fboxes.push_back(box);
    }

    RatioReport report;
    report.sup = 0.0;
    report.inf = std::numeric_limits<double>::infinity();

    std::vector<RatioEntry> entries(std::size_t(n_hi - n_lo + 1));
    parallel_batches(long(entries.size()), [&](long off) {
        int nval = n_lo + int(off);
        FreqVec n{nval};

        chaos::ModeSymbolSpace space(p.alpha);
        chaos::BlockSum bs = build_product_blocksum(factors, t, n, space, 24);
        chaos::WickComponent top = chaos::project_block_sum(bs, 0, space);
        double lhs = chaos::chaos_covariance(top, top).real();

        // rhs: convolution of factor moments at n
        double rhs = 0.0;
        if (factors.size() == 1) {
            rhs = fboxes[0].contains(n) ? fmoms[0][fboxes[0].index_of(n)] : 0.0;
        } else {
            std::function<double(std::size_t, int)> conv = [&](std::size_t j, int rem) -> double {
                if (j + 1 == factors.size()) {
                    FreqVec r{rem};
                    return fboxes[j].contains(r) ? fmoms[j][fboxes[j].index_of(r)] : 0.0;
                }
                double acc = 0.0;
                int nj = fboxes[j].N;
                for (int m = -nj; m <= nj; ++m) {
                    double v = fmoms[j][fboxes[j].index_of(FreqVec{m})];
                    if (v != 0.0) acc += v * conv(j + 1, rem - m);
                }
                return acc;
            };
            rhs = conv(0, nval);
        }
        entries[std::size_t(off)] = {n, lhs, rhs, rhs > 0.0 ? lhs / rhs : 0.0};
    });

    for (auto& e : entries) {
        if (e.rhs > 0.0) {
            report.sup = std::max(report.sup, e.ratio);
            report.inf = std::min(report.inf, e.ratio);
        }
        report.entries.push_back(std::move(e));
    }
    if (!std::isfinite(report.inf)) report.inf = 0.0;
    return report;
}

DecompositionCheck chaos_decomposition_check(const std::vector<ObjectSpec>& factors, double t,
                                             const FreqVec& n, int duhamel_nodes) {
    if (factors.empty()) throw std::invalid_argument("decomposition check: no factors");
    int k_total = 0;
    for (const auto& f : factors) {
        f.validate();
        k_total += factor_shape(f).degree;
    }
    if (k_total > 6)
        throw std::invalid_argument("decomposition check: total order limited to 6");
    const ParamSet& p = factors[0].params;
    if (p.N > 4 || p.d != 1)
        throw std::invalid_argument("decomposition check: exact regime is d=1, N <= 4");

    chaos::ModeSymbolSpace space(p.alpha);
    chaos::BlockSum bs = build_product_blocksum(factors, t, n, space, duhamel_nodes);

    DecompositionCheck out;
    out.full = chaos::full_moment(bs, space);
    double sum = 0.0;
    for (int ell = 0; 2 * ell <= k_total; ++ell) {
        chaos::WickComponent c = chaos::project_block_sum(bs, ell, space);
        double m = chaos::chaos_covariance(c, c).real();
        out.projected.push_back(m);
        sum += m;
    }
    out.residual = std::abs(out.full - sum);
    return out;
}

// --- CSV --------------------------------------------------------------------------

std::string moment_table_csv(const MomentTable& table) {
    std::ostringstream os;
    os << "shell_or_n,estimate,stderr,samples\n";
    os.precision(17);
    for (const auto& e : table.entries) {
        if (e.is_shell) {
            os << "shell:" << e.shell;
        } else {
            os << "n:";
            for (std::size_t i = 0; i < e.n.size(); ++i) os << (i ? ";" : "") << e.n[i];
        }
        os << "," << e.estimate << "," << e.stderr_ << "," << e.samples << "\n";
    }
    return os.str();
}

MomentTable moment_table_from_csv(const std::string& text) {
    MomentTable table;
    std::istringstream is(text);
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.rfind("shell_or_n", 0) == 0) continue;
        }
        std::istringstream ls(line);
        std::string id, est, se, cnt;
        if (!std::getline(ls, id, ',') || !std::getline(ls, est, ',') ||
            !std::getline(ls, se, ',') || !std::getline(ls, cnt, ','))
            throw std::runtime_error("moment table: malformed row: " + line);
        MomentEntry e;
        if (id.rfind("shell:", 0) == 0) {
            e.is_shell = true;
            e.shell = std::stoi(id.substr(6));
        } else if (id.rfind("n:", 0) == 0) {
            e.is_shell = false;
            std::istringstream ns(id.substr(2));
            std::string c;
            while (std::getline(ns, c, ';')) e.n.push_back(std::stoi(c));
        } else {
            throw std::runtime_error("moment table: bad id field: " + id);
        }
        e.estimate = std::stod(est);
        e.stderr_ = std::stod(se);
        e.samples = std::stol(cnt);
        table.entries.push_back(std::move(e));
    }
    return table;
}

} // namespace wicklab
