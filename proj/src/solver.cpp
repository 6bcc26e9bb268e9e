#include "wicklab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace wicklab {

Admissibility admissible_params(int d, int k, double alpha, double beta) {
    if (k < 2) throw std::invalid_argument("admissible_params: k >= 2");
    if (alpha <= 0.0) throw std::invalid_argument("admissible_params: alpha > 0");

    Admissibility out;
    std::ostringstream detail;
    detail.precision(6);

    const double dh = 0.5 * double(d);

    // dispersion strength against the nonlinearity degree
    double c1 = double(k - 1) * (dh - double(k - 1) / double(k) * beta);
    if (!(alpha > c1)) {
        out.reason = RejectReason::dispersion_vs_degree;
        detail << "needs alpha > (k-1)*(d/2 - (k-1)/k*beta) = " << c1 << ", got alpha = " << alpha;
        out.detail = detail.str();
        return out;
    }
    if (k >= 3) {
        double c2 = double(k - 1) * dh - double(k * k - 3 * k + 3) / double(k - 1) * beta;
        if (!(alpha > c2)) {
            out.reason = RejectReason::dispersion_vs_degree_strong;
            detail << "needs alpha > (k-1)*d/2 - (k^2-3k+3)/(k-1)*beta = " << c2
                   << ", got alpha = " << alpha;
            out.detail = detail.str();
            return out;
        }
    }

    // beta window for existence of the stochastic objects
    double beta_lo = std::max(dh - dh / double(k), dh - alpha / (2.0 * double(k)));
    if (!(beta > beta_lo && beta <= dh)) {
        out.reason = RejectReason::beta_range;
        detail << "needs max(d/2 - d/(2k), d/2 - alpha/(2k)) = " << beta_lo << " < beta <= d/2 = "
               << dh << ", got beta = " << beta;
        out.detail = detail.str();
        return out;
    }

    // sigma window for the remainder class
    double lo = std::max(0.0, dh - alpha / double(k - 1));
    if (k >= 3)
        lo = std::max(lo, double(k - 1) / double(k - 2) * dh - beta / double(k - 2) -
                              alpha / double(k - 2));
    double hi = alpha + double(k - 1) * (beta - dh);
    if (!(lo < hi)) {
        out.reason = RejectReason::empty_sigma_window;
        detail << "sigma window empty: lower end " << lo << " >= upper end " << hi;
        out.detail = detail.str();
        return out;
    }

    out.admissible = true;
    out.sigma_lo = lo;
    out.sigma_hi = hi;
    out.sigma_default = 0.5 * (lo + hi);
    return out;
}

std::vector<ForcingTriple> forcing_triples(int k) {
    std::vector<ForcingTriple> out;
    std::vector<double> fact(std::size_t(k + 1), 1.0);
    for (int i = 1; i <= k; ++i) fact[std::size_t(i)] = fact[std::size_t(i - 1)] * double(i);
    for (int k1 = 0; k1 <= k - 1; ++k1)
        for (int k2 = 0; k2 <= k - k1; ++k2) {
            int k3 = k - k1 - k2;
            out.push_back({k1, k2, k3,
                           fact[std::size_t(k)] / (fact[std::size_t(k1)] * fact[std::size_t(k2)] *
                                                   fact[std::size_t(k3)])});
        }
    return out;
}

namespace {

std::vector<double> uniform_grid(double t_final, int steps) {
    std::vector<double> ts(std::size_t(steps + 1));
    for (int i = 0; i <= steps; ++i) ts[std::size_t(i)] = t_final * double(i) / double(steps);
    ts[0] = 0.0;
    return ts;
}

// discrete C_T H^sigma norm
double ct_norm(const SpacetimeField& f, double sigma) {
    double m = 0.0;
    for (const auto& fr : f.frames) m = std::max(m, sobolev_norm(fr, sigma));
    return m;
}

// per-mode trapezoid prefix Duhamel sums of a frame sequence:
// out[i](n) = int_0^{t_i} sin((t_i - tau) w_n)/w_n f(n, tau) dtau
// computed from running sin/cos prefix integrals so all grid times cost
// O(steps) per mode total.
std::vector<SpectralField> duhamel_prefix(const std::vector<SpectralField>& frames,
                                          const std::vector<double>& times, double alpha) {
    const Lattice& lat = frames.front().lattice;
    const std::size_t modes = lat.size();
    const std::size_t m = frames.size();
    std::vector<double> omega(modes);
    std::vector<double> br = bracket_table(lat);
    for (std::size_t i = 0; i < modes; ++i) omega[i] = std::pow(br[i], alpha);

    std::vector<SpectralField> out(m, SpectralField(lat, frames.front().real_flag));
    // sin((t-tau)w) = sin(tw)cos(tau w) - cos(tw)sin(tau w): accumulate the
    // two prefix integrals of cos(tau w) f and sin(tau w) f
    std::vector<cplx> acc_cos(modes, cplx(0, 0)), acc_sin(modes, cplx(0, 0));
    std::vector<cplx> prev_c(modes), prev_s(modes);
    for (std::size_t i = 0; i < modes; ++i) {
        prev_c[i] = frames[0].coeffs[i]; // cos(0)=1
        prev_s[i] = cplx(0, 0);
    }
    for (std::size_t j = 0; j < m; ++j) {
        if (j > 0) {
            double h = times[j] - times[j - 1];
            for (std::size_t i = 0; i < modes; ++i) {
                cplx cj = frames[j].coeffs[i] * std::cos(times[j] * omega[i]);
                cplx sj = frames[j].coeffs[i] * std::sin(times[j] * omega[i]);
                acc_cos[i] += 0.5 * h * (prev_c[i] + cj);
                acc_sin[i] += 0.5 * h * (prev_s[i] + sj);
                prev_c[i] = cj;
                prev_s[i] = sj;
            }
        }
        for (std::size_t i = 0; i < modes; ++i) {
            double tw = times[j] * omega[i];
            out[j].coeffs[i] =
                (std::sin(tw) * acc_cos[i] - std::cos(tw) * acc_sin[i]) / omega[i];
        }
    }
    return out;
}

} // namespace

ForcingFamily build_forcing(const ParamSet& params, int steps) {
    const Lattice lat(params.d, params.N);
    const double sigma_n = cutoff_variance(lat, params.beta);
    GaussianDraw draw = GaussianDraw::sample(lat, params.seed);

    ForcingFamily fam;
    fam.params = params;
    fam.times = uniform_grid(params.T, steps);
    const std::size_t m = fam.times.size();

    // Z frames and truncated Wick powers :Z^l: for l = 1..k
    std::vector<std::vector<SpectralField>> wick(std::size_t(params.k + 1));
    for (std::size_t j = 0; j < m; ++j) {
        SpectralField z = linear_solution(draw, params.beta, params.alpha, fam.times[j]);
        for (int l = 1; l <= params.k; ++l)
            wick[std::size_t(l)].push_back(truncate(wick_power(z, WickSpec(l, sigma_n)), params.N));
    }

    // I(:Z^k:) on the same grid
    std::vector<SpectralField> duh =
        duhamel_prefix(wick[std::size_t(params.k)], fam.times, params.alpha);

    for (int k1 = 0; k1 <= params.k - 1; ++k1) {
        for (int k2 = 0; k1 + k2 <= params.k; ++k2) {
            SpacetimeField obj;
            obj.times = fam.times;
            for (std::size_t j = 0; j < m; ++j) {
                std::vector<SpectralField> factors;
                if (k1 >= 1) factors.push_back(wick[std::size_t(k1)][j]);
                for (int c = 0; c < k2; ++c) factors.push_back(duh[j]);
                SpectralField prod;
                if (factors.empty()) {
                    prod = SpectralField(lat, true);
                    prod.at(FreqVec(std::size_t(params.d), 0)) = cplx(1.0, 0.0);
                } else if (factors.size() == 1) {
                    prod = factors[0];
                } else {
                    prod = truncate(pointwise_product(factors), params.N);
                }
                obj.frames.push_back(std::move(prod));
            }
            fam.objects.emplace(std::make_pair(k1, k2), std::move(obj));
        }
    }

    // aggregate size of the family at its fitted regularity indices
    const double dh = 0.5 * double(params.d);
    fam.norm_z = 0.0;
    for (const auto& [key, obj] : fam.objects) {
        double s = key.first >= 1 ? double(key.first) * (params.beta - dh) - 0.05 : 0.05;
        fam.norm_z += ct_norm(obj, s);
    }
    return fam;
}

PicardResult picard_solve(const ForcingFamily& forcing, const ParamSet& params, double tol,
                          int max_iter) {
    const Lattice lat(params.d, params.N);
    const std::vector<double>& times = forcing.times;
    const std::size_t m = times.size();

    auto triples = forcing_triples(params.k);

    SpacetimeField v;
    v.times = times;
    v.frames.assign(m, SpectralField(lat, true));

    PicardResult out;
    out.v = v;
    double prev_diff = -1.0;

    for (int it = 0; it < max_iter; ++it) {
        // G(tau_j) = sum over triples of signed coeff * Xi_{k1,k2} * v^{k3}.
        // The Duhamel-image factor enters the expansion as (v - I(:Z^k:))^{k2+k3},
        // so each I power carries a sign flip.
        std::vector<SpectralField> rhs(m, SpectralField(lat, true));
        for (const auto& tr : triples) {
            const SpacetimeField& xi = forcing.objects.at({tr.k1, tr.k2});
            const double sign = (tr.k2 % 2 == 0) ? 1.0 : -1.0;
            for (std::size_t j = 0; j < m; ++j) {
                std::vector<SpectralField> factors;
                factors.push_back(xi.frames[j]);
                for (int c = 0; c < tr.k3; ++c) factors.push_back(out.v.frames[j]);
                SpectralField prod = factors.size() == 1
                                         ? factors[0]
                                         : truncate(pointwise_product(factors), params.N);
                rhs[j] = add(rhs[j], scale(prod, cplx(sign * tr.coeff, 0.0)));
            }
        }

        std::vector<SpectralField> integrated = duhamel_prefix(rhs, times, params.alpha);
        SpacetimeField v_next;
        v_next.times = times;
        for (std::size_t j = 0; j < m; ++j) v_next.frames.push_back(scale(integrated[j], -1.0));

        SpacetimeField diff;
        diff.times = times;
        for (std::size_t j = 0; j < m; ++j) diff.frames.push_back(sub(v_next.frames[j], out.v.frames[j]));
        double dn = ct_norm(diff, params.sigma);

        out.v = std::move(v_next);
        out.report.iterate_norms.push_back(ct_norm(out.v, params.sigma));
        if (prev_diff > 0.0) out.report.contraction_ratios.push_back(dn / prev_diff);
        prev_diff = dn > 0.0 ? dn : prev_diff;
        out.report.final_residual = dn;
        out.report.iterations = it + 1;
        if (dn < tol) {
            out.report.converged = true;
            break;
        }
    }
    return out;
}

SpacetimeField solve_truncated(const ParamSet& params, int steps, bool nonlinearity_off) {
    const Lattice lat(params.d, params.N);
    const double sigma_n = cutoff_variance(lat, params.beta);
    InitialData data = sample_initial_data(lat, params.beta, params.alpha, params.seed);

    const std::size_t modes = lat.size();
    std::vector<double> omega(modes);
    {
        std::vector<double> br = bracket_table(lat);
        for (std::size_t i = 0; i < modes; ++i) omega[i] = std::pow(br[i], params.alpha);
    }

    SpectralField u = data.u0;
    SpectralField p = data.u1; // time derivative
    const double h = params.T / double(steps);

    auto half_flow = [&](const SpectralField& uu, const SpectralField& pp, double dt,
                         SpectralField& uo, SpectralField& po) {
        for (std::size_t i = 0; i < modes; ++i) {
            double c = std::cos(dt * omega[i]);
            double s = std::sin(dt * omega[i]);
            uo.coeffs[i] = c * uu.coeffs[i] + s / omega[i] * pp.coeffs[i];
            po.coeffs[i] = -omega[i] * s * uu.coeffs[i] + c * pp.coeffs[i];
        }
    };

    SpacetimeField out;
    out.times = uniform_grid(params.T, steps);
    out.frames.push_back(u);

    SpectralField umid(lat, true), pmid(lat, true);
    double prev_norm = sobolev_norm(u, 0.0);
    for (int step = 0; step < steps; ++step) {
        SpectralField f(lat, true);
        if (!nonlinearity_off) {
            half_flow(u, p, 0.5 * h, umid, pmid);
            // f = -P_N H_k(u_mid; sigma_N), evaluated alias-free
            SpectralField hk = truncate(wick_power(umid, WickSpec(params.k, sigma_n)), params.N);
            f = scale(hk, -1.0);
        }
        SpectralField un(lat, true), pn(lat, true);
        for (std::size_t i = 0; i < modes; ++i) {
            double c = std::cos(h * omega[i]);
            double s = std::sin(h * omega[i]);
            double w2 = omega[i] * omega[i];
            un.coeffs[i] = c * u.coeffs[i] + s / omega[i] * p.coeffs[i] + (1.0 - c) / w2 * f.coeffs[i];
            pn.coeffs[i] = -omega[i] * s * u.coeffs[i] + c * p.coeffs[i] + s / omega[i] * f.coeffs[i];
        }
        u = std::move(un);
        p = std::move(pn);
        double nn = sobolev_norm(u, 0.0);
        if (nn > 10.0 * std::max(prev_norm, 1e-12) && prev_norm > 0.0)
            throw std::runtime_error("solve_truncated: step instability, norm grew " +
                                     std::to_string(nn / prev_norm) + "x in one step");
        prev_norm = std::max(nn, 1e-12);
        out.frames.push_back(u);
    }
    return out;
}

DecompositionResidual decomposition_check(const ParamSet& params, int base_steps, int levels) {
    DecompositionResidual out;
    for (int lvl = 0; lvl < levels; ++lvl) {
        int steps = base_steps << lvl;
        SpacetimeField u = solve_truncated(params, steps);

        ForcingFamily fam = build_forcing(params, steps);
        PicardResult pic = picard_solve(fam, params, 1e-12, 80);

        // reconstruct Z_N and I(:Z_N^k:) on the same grid and realization
        const Lattice lat(params.d, params.N);
        GaussianDraw draw = GaussianDraw::sample(lat, params.seed);
        const double sigma_n = cutoff_variance(lat, params.beta);
        std::vector<SpectralField> wick_frames;
        std::vector<SpectralField> z_frames;
        for (double t : fam.times) {
            SpectralField z = linear_solution(draw, params.beta, params.alpha, t);
            z_frames.push_back(z);
            wick_frames.push_back(truncate(wick_power(z, WickSpec(params.k, sigma_n)), params.N));
        }
        std::vector<SpectralField> duh = duhamel_prefix(wick_frames, fam.times, params.alpha);

        double res = 0.0;
        for (std::size_t j = 0; j < fam.times.size(); ++j) {
            SpectralField expect = add(sub(z_frames[j], duh[j]), pic.v.frames[j]);
            res = std::max(res, sobolev_norm(sub(u.frames[j], expect), params.sigma));
        }
        out.steps.push_back(steps);
        out.residuals.push_back(res);
    }
    return out;
}

ConvergenceStudy convergence_study(const ParamSet& params, const std::vector<int>& cutoffs,
                                   int steps) {
    ConvergenceStudy out;
    out.cutoffs = cutoffs;
    Admissibility adm = admissible_params(params.d, params.k, params.alpha, params.beta);
    out.sigma_in_window =
        adm.admissible && params.sigma > adm.sigma_lo && params.sigma < adm.sigma_hi;

    std::vector<SpacetimeField> vs;
    for (int n : cutoffs) {
        ParamSet p = params;
        p.N = n;
        ForcingFamily fam = build_forcing(p, steps);
        PicardResult pic = picard_solve(fam, p, 1e-10, 80);
        vs.push_back(std::move(pic.v));
    }

    std::ostringstream csv;
    csv.precision(17);
    csv << "N,diff_norm,rate\n";
    for (std::size_t i = 0; i + 1 < vs.size(); ++i) {
        const SpacetimeField& small = vs[i];
        const SpacetimeField& big = vs[i + 1];
        double dn = 0.0;
        for (std::size_t j = 0; j < small.times.size(); ++j) {
            SpectralField emb = embed(small.frames[j], big.frames[j].lattice.N);
            dn = std::max(dn, sobolev_norm(sub(big.frames[j], emb), params.sigma));
        }
        out.diff_norms.push_back(dn);
        double rate = 0.0;
        if (out.diff_norms.size() >= 2 && dn > 0.0)
            rate = std::log2(out.diff_norms[out.diff_norms.size() - 2] / dn);
        out.rates.push_back(rate);
        csv << cutoffs[i] << "," << dn << "," << rate << "\n";
    }
    out.csv = csv.str();
    return out;
}

} // namespace wicklab
