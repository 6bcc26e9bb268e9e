#include "wicklab/counting.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "wicklab/parallel.hpp"

namespace wicklab::counting {

namespace {

// sum_{|m|_inf > R} <m>^{-p} <= C(d) R^{d-p} / (p-d), from the integral
// comparison; C(1) = 2, C(2) = 8 (boundary count of the sup-norm sphere).
double tail_over_radius(int d, double p, long radius) {
    if (p <= double(d)) throw std::invalid_argument("tail bound: exponent must exceed d");
    double c = d == 1 ? 2.0 : 8.0;
    return c * std::pow(double(radius), double(d) - p) / (p - double(d));
}

// Peetre factor: <x+y>^s <= 2^{|s|/2}... we use the crude form
// <n - m>^{-b} <= 2^{|b|} <n>^{|b|} <m>^{-b}.
double peetre(double b, double bracket_n) {
    return std::pow(2.0, std::abs(b)) * std::pow(bracket_n, std::abs(b));
}

} // namespace

SumReport conv_sum2(int d, double a, double b, const FreqVec& n, long radius) {
    if (int(n.size()) != d) throw std::invalid_argument("conv_sum2: frequency dimension mismatch");
    if (a + b <= double(d))
        throw std::invalid_argument("conv_sum2: divergent, needs a + b > d (a=" +
                                    std::to_string(a) + ", b=" + std::to_string(b) + ")");
    if (d != 1 && d != 2) throw std::invalid_argument("conv_sum2: only d=1,2 supported");

    double value = 0.0;
    if (d == 1) {
        const long n0 = n[0];
        for (long m = -radius; m <= radius; ++m)
            value += std::pow(bracket1(m), -a) * std::pow(bracket1(n0 - m), -b);
    } else {
        // precomputed 1d coordinate squares keep the inner loop cheap
        const long n0 = n[0], n1 = n[1];
        for (long m0 = -radius; m0 <= radius; ++m0) {
            double q0 = double(m0) * double(m0);
            double r0 = double(n0 - m0) * double(n0 - m0);
            double acc = 0.0;
            for (long m1 = -radius; m1 <= radius; ++m1) {
                double br_m = std::sqrt(1.0 + q0 + double(m1) * double(m1));
                double diff = double(n1 - m1);
                double br_r = std::sqrt(1.0 + r0 + diff * diff);
                acc += std::pow(br_m, -a) * std::pow(br_r, -b);
            }
            value += acc;
        }
    }

    SumReport rep;
    rep.value = value;
    rep.tail_bound = peetre(b, bracket(n)) * tail_over_radius(d, a + b, radius);
    rep.d = d;
    rep.radius = radius;
    return rep;
}

SumReport conv_sum3(int d, double a, double b, double c, const FreqVec& avec, const FreqVec& bvec,
                    long radius) {
    if (int(avec.size()) != d || int(bvec.size()) != d)
        throw std::invalid_argument("conv_sum3: frequency dimension mismatch");
    if (!(a + 2.0 * b > double(d)))
        throw std::invalid_argument("conv_sum3: hypothesis a + 2b > d violated");
    if (!(a + 2.0 * c > double(d)))
        throw std::invalid_argument("conv_sum3: hypothesis a + 2c > d violated");
    if (!(a < double(d)))
        throw std::invalid_argument("conv_sum3: hypothesis a < d violated");
    if (!(2.0 * b < double(d)))
        throw std::invalid_argument("conv_sum3: hypothesis 2b < d violated");
    if (!(2.0 * c < double(d)))
        throw std::invalid_argument("conv_sum3: hypothesis 2c < d violated");
    if (d != 1 && d != 2) throw std::invalid_argument("conv_sum3: only d=1,2 supported");

    double value = 0.0;
    if (d == 1) {
        const long av = avec[0], bv = bvec[0];
        for (long m = -radius; m <= radius; ++m)
            value += std::pow(bracket1(m), -a) * std::pow(bracket1(m + av), -b) *
                     std::pow(bracket1(m + bv), -c);
    } else {
        const long a0 = avec[0], a1 = avec[1], b0 = bvec[0], b1 = bvec[1];
        for (long m0 = -radius; m0 <= radius; ++m0) {
            double acc = 0.0;
            for (long m1 = -radius; m1 <= radius; ++m1) {
                double brm = std::sqrt(1.0 + double(m0) * double(m0) + double(m1) * double(m1));
                double bra = std::sqrt(1.0 + double(m0 + a0) * double(m0 + a0) +
                                       double(m1 + a1) * double(m1 + a1));
                double brb = std::sqrt(1.0 + double(m0 + b0) * double(m0 + b0) +
                                       double(m1 + b1) * double(m1 + b1));
                acc += std::pow(brm, -a) * std::pow(bra, -b) * std::pow(brb, -c);
            }
            value += acc;
        }
    }

    SumReport rep;
    rep.value = value;
    // beyond |m| > R the summand is <= peetre factors times <m>^{-a-b-c}
    rep.tail_bound = peetre(b, bracket(avec)) * peetre(c, bracket(bvec)) *
                     tail_over_radius(d, a + b + c, radius);
    rep.d = d;
    rep.radius = radius;
    return rep;
}

void finalize_sweep(SweepReport& rep) {
    rep.sup_ratio = 0.0;
    for (const auto& e : rep.entries) rep.sup_ratio = std::max(rep.sup_ratio, e.ratio);

    // Flag strict ratio growth across the whole top octave by more than 11%.
    // A sum obeying the claimed power-law bound approaches its constant from
    // below at a few percent per octave here, while a logarithmically
    // divergent ratio gains ~14% per octave at these scales.
    double top = rep.entries.empty() ? 0.0 : rep.entries.back().target_bracket;
    bool increasing = true;
    double first = -1.0, prev = -1.0;
    int seen = 0;
    for (const auto& e : rep.entries) {
        if (e.target_bracket < top / 2.0) continue;
        if (seen == 0) first = e.ratio;
        if (seen > 0 && e.ratio <= prev) increasing = false;
        prev = e.ratio;
        ++seen;
    }
    rep.monotone_growth_flag = (seen >= 3) && increasing && prev > 1.11 * first;
}

SweepReport conv_bound_sweep(SumCase which, int d, double a, double b, double c, double lo,
                             double hi, long radius) {
    if (d != 1) throw std::invalid_argument("conv_bound_sweep: sweeps are d=1");
    std::vector<long> targets;
    for (long v = 1; double(v) <= hi * 1.0001; v = std::max(v + 1, (v * 5) / 4)) {
        if (bracket1(v) >= lo && bracket1(v) <= hi) targets.push_back(v);
    }
    if (targets.size() < 4) throw std::invalid_argument("conv_bound_sweep: sweep range too narrow");

    SweepReport rep;
    rep.entries.resize(targets.size());
    parallel_batches(long(targets.size()), [&](long i) {
        long v = targets[std::size_t(i)];
        SweepEntry e;
        if (which == SumCase::two_factor) {
            SumReport sr = conv_sum2(d, a, b, FreqVec{int(v)}, radius);
            e.target_bracket = bracket1(v);
            e.value = sr.value;
            e.bound = std::pow(e.target_bracket, double(d) - a - b);
            e.tail = sr.tail_bound;
        } else {
            SumReport sr = conv_sum3(d, a, b, c, FreqVec{int(v)}, FreqVec{int(-v)}, radius);
            e.target_bracket = bracket1(v);
            e.value = sr.value;
            e.bound = std::pow(e.target_bracket, double(d) / 2.0 - a / 2.0 - b) *
                      std::pow(e.target_bracket, double(d) / 2.0 - a / 2.0 - c);
            e.tail = sr.tail_bound;
        }
        e.ratio = e.value / e.bound;
        rep.entries[std::size_t(i)] = e;
    });

    finalize_sweep(rep);
    return rep;
}

std::string sweep_csv(const SweepReport& r) {
    std::ostringstream os;
    os.precision(17);
    os << "target,value,bound,ratio,tail\n";
    for (const auto& e : r.entries)
        os << e.target_bracket << "," << e.value << "," << e.bound << "," << e.ratio << ","
           << e.tail << "\n";
    return os.str();
}

} // namespace wicklab::counting
