#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "wicklab/moments.hpp"

using namespace wicklab;

namespace {

ParamSet params(int n, double beta = 0.4, double alpha = 0.5) {
    ParamSet p;
    p.d = 1;
    p.N = n;
    p.beta = beta;
    p.alpha = alpha;
    return p;
}

} // namespace

TEST_CASE("exact wick moment: single factor and the hand-enumerated case") {
    Lattice lat(1, 1);
    // ell = 1 reduces to the plain weight
    CHECK(exact_wick_moment(1, lat, 0.5, FreqVec{1}) ==
          doctest::Approx(std::pow(std::sqrt(2.0), -1.0)));
    CHECK(exact_wick_moment(1, lat, 0.5, FreqVec{2}) == 0.0); // outside the box

    // ell=2, d=1, N=1, beta=1/2, n=0: 2 * (1 + 1/2 + 1/2) = 4
    CHECK(exact_wick_moment(2, lat, 0.5, FreqVec{0}) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("exact wick moment is even in n and matches a direct tuple sum") {
    Lattice lat(1, 6);
    const double beta = 0.35;
    auto direct = [&](int ell, int n) {
        // ordered tuple sum times ell!
        double fact = 1.0;
        for (int i = 2; i <= ell; ++i) fact *= double(i);
        double acc = 0.0;
        std::function<double(int, int)> rec = [&](int j, int rem) -> double {
            if (j + 1 == ell)
                return std::abs(rem) <= lat.N ? std::pow(bracket1(rem), -2.0 * beta) : 0.0;
            double s = 0.0;
            for (int m = -lat.N; m <= lat.N; ++m)
                s += std::pow(bracket1(m), -2.0 * beta) * rec(j + 1, rem - m);
            return s;
        };
        return fact * rec(0, n);
    };
    for (int ell : {2, 3}) {
        for (int n : {0, 1, 5, 9}) {
            double got = exact_wick_moment(ell, lat, beta, FreqVec{n});
            CHECK(got == doctest::Approx(direct(ell, n)).epsilon(1e-10));
            CHECK(got == doctest::Approx(exact_wick_moment(ell, lat, beta, FreqVec{-n})));
        }
    }
}

TEST_CASE("exact duhamel moment: zero horizon, closed form vs quadrature") {
    Lattice lat(1, 6);
    CHECK(exact_duhamel_moment(2, lat, 0.4, 0.5, 0.0, FreqVec{1}) == 0.0);

    // k=1 and k=2: closed-form time integrals against tensor gauss quadrature
    for (int k : {1, 2}) {
        for (int n : {0, 2, 7}) {
            double a = exact_duhamel_moment(k, lat, 0.4, 0.5, 0.7, FreqVec{n});
            double b = exact_duhamel_moment_quad(k, lat, 0.4, 0.5, 0.7, FreqVec{n},
                                                 QuadratureRule(QuadKind::gauss_legendre, 48));
            CHECK(a == doctest::Approx(b).epsilon(1e-8));
        }
    }
}

TEST_CASE("monte carlo agrees with the duhamel oracle at N=16") {
    const ParamSet p = params(16);
    ObjectSpec spec;
    spec.kind = ObjectKind::duhamel_wick;
    spec.k = 2;
    spec.params = p;

    Targets targets;
    for (int n = 0; n <= 8; ++n) targets.modes.push_back(FreqVec{n});
    MomentTable table = mc_moment(spec, 0.5, targets, 6000, 2024);

    Lattice lat(1, 16);
    for (const auto& e : table.entries) {
        double expect = exact_duhamel_moment(2, lat, p.beta, p.alpha, 0.5, e.n);
        CHECK(std::abs(e.estimate - expect) <= 4.0 * e.stderr_);
    }
}

TEST_CASE("mc moment of Z matches the weight law") {
    ObjectSpec spec;
    spec.kind = ObjectKind::z;
    spec.params = params(8);
    Targets targets;
    for (int n = 0; n <= 8; n += 2) targets.modes.push_back(FreqVec{n});
    MomentTable table = mc_moment(spec, 0.4, targets, 5000, 7);
    for (const auto& e : table.entries) {
        double expect = std::pow(bracket(e.n), -2.0 * spec.params.beta);
        CHECK(std::abs(e.estimate - expect) <= 4.0 * e.stderr_);
    }
}

TEST_CASE("mc moment is reproducible and stderr shrinks like sqrt(samples)") {
    ObjectSpec spec;
    spec.kind = ObjectKind::wick_power;
    spec.ell = 2;
    spec.params = params(8);
    Targets targets;
    targets.modes.push_back(FreqVec{3});

    MomentTable a = mc_moment(spec, 0.3, targets, 2000, 99);
    MomentTable b = mc_moment(spec, 0.3, targets, 2000, 99);
    CHECK(a.entries[0].estimate == b.entries[0].estimate);
    CHECK(a.entries[0].stderr_ == b.entries[0].stderr_);

    // averaged over repeated runs, doubling the samples shrinks stderr ~ sqrt(2)
    double r1 = 0.0, r2 = 0.0;
    for (int rep = 0; rep < 6; ++rep) {
        r1 += mc_moment(spec, 0.3, targets, 1500, std::uint64_t(100 + rep)).entries[0].stderr_;
        r2 += mc_moment(spec, 0.3, targets, 3000, std::uint64_t(200 + rep)).entries[0].stderr_;
    }
    CHECK(r1 / r2 == doctest::Approx(std::sqrt(2.0)).epsilon(0.2));
}

TEST_CASE("shell targets average over the shell's modes") {
    ObjectSpec spec;
    spec.kind = ObjectKind::z;
    spec.params = params(16);
    Targets t;
    t.shells = {2, 3};
    MomentTable table = mc_moment(spec, 0.0, t, 500, 5);
    REQUIRE(table.entries.size() == 2);
    for (const auto& e : table.entries) {
        CHECK(e.is_shell);
        // shell mean of <n>^{-2 beta}
        auto modes = shell_modes(1, 16, e.shell);
        double expect = 0.0;
        for (const auto& n : modes) expect += std::pow(bracket(n), -2.0 * spec.params.beta);
        expect /= double(modes.size());
        CHECK(std::abs(e.estimate - expect) <= 5.0 * e.stderr_);
    }
}

TEST_CASE("delta moment: zero increment and the closed form") {
    ObjectSpec spec;
    spec.kind = ObjectKind::z;
    spec.params = params(8);
    Targets t;
    for (int n : {0, 2, 5}) t.modes.push_back(FreqVec{n});

    MomentTable zero = delta_moment(spec, 0.4, 0.0, t, 100, 3);
    for (const auto& e : zero.entries) CHECK(e.estimate == 0.0);

    const double h = 0.3;
    MomentTable table = delta_moment(spec, 0.4, h, t, 6000, 17);
    Lattice lat(1, 8);
    for (const auto& e : table.entries) {
        double expect = exact_z_delta_moment(lat, spec.params.beta, spec.params.alpha, h, e.n);
        CHECK(std::abs(e.estimate - expect) <= 4.0 * e.stderr_);
    }

    CHECK_THROWS_AS((void)delta_moment(spec, 0.1, -0.5, t, 10, 1), std::invalid_argument);
}

TEST_CASE("delta closed form scales like h^2 for small h (sigma2 = 2)") {
    // slope of log moment vs log h at fixed n, small-h regime
    Lattice lat(1, 64);
    const double beta = 0.4, alpha = 1.0;
    FreqVec n{5};
    std::vector<double> hs{1e-3, 2e-3, 4e-3, 8e-3};
    std::vector<double> ys;
    for (double h : hs) ys.push_back(std::log(exact_z_delta_moment(lat, beta, alpha, h, n)));
    for (std::size_t i = 0; i + 1 < hs.size(); ++i) {
        double slope = (ys[i + 1] - ys[i]) / (std::log(hs[i + 1]) - std::log(hs[i]));
        CHECK(slope == doctest::Approx(2.0).epsilon(0.01));
    }
    // and like <n>^{2 alpha - 2 beta} across n: sigma1 = 2 alpha at fixed small h
    FreqVec m{10};
    double ratio = exact_z_delta_moment(lat, beta, alpha, 1e-3, m) /
                   exact_z_delta_moment(lat, beta, alpha, 1e-3, n);
    double expect = std::pow(bracket(m) / bracket(n), 2.0 * alpha - 2.0 * beta);
    CHECK(ratio == doctest::Approx(expect).epsilon(0.01));
}

TEST_CASE("fit exponent: synthetic power law is recovered exactly") {
    MomentTable table;
    for (int n = 1; n <= 200; ++n) {
        MomentEntry e;
        e.n = FreqVec{n};
        e.estimate = std::pow(bracket(e.n), -3.0);
        e.samples = 1;
        table.entries.push_back(e);
    }
    ExponentFit fit = fit_exponent(table, 1, 0, 12);
    CHECK(fit.slope == doctest::Approx(-3.0).epsilon(1e-9));
    CHECK(fit.s0_hat == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(fit.stderr_ < 1e-6);
}

TEST_CASE("fit exponent: constant table gives slope 0 and s0 = -d/2") {
    MomentTable table;
    for (int n = 1; n <= 100; ++n) {
        MomentEntry e;
        e.n = FreqVec{n};
        e.estimate = 2.5;
        e.samples = 1;
        table.entries.push_back(e);
    }
    ExponentFit fit = fit_exponent(table, 1, 0, 12);
    CHECK(fit.slope == doctest::Approx(0.0));
    CHECK(fit.s0_hat == doctest::Approx(-0.5));
}

TEST_CASE("fit exponent rejects thin tables") {
    MomentTable table;
    MomentEntry e;
    e.n = FreqVec{1};
    e.estimate = 1.0;
    table.entries.push_back(e);
    CHECK_THROWS_AS((void)fit_exponent(table, 1, 0, 12), std::runtime_error);
}

TEST_CASE("wick moment table recovers the predicted slope at desk scale") {
    // theory: slope = -d - 2*ell*(beta - d/2) = -0.6 for ell=2, beta=0.4, d=1
    Lattice lat(1, 1024);
    auto all = exact_wick_moment_all(2, lat, 0.4);
    Lattice big(1, 2048);
    MomentTable table = shell_table(1, 2048, 3, 7, [&](const FreqVec& n) {
        return all[big.index_of(n)];
    });
    ExponentFit fit = fit_exponent(table, 1, 3, 7);
    CHECK(std::abs(fit.slope - (-0.6)) < 0.12);
}

TEST_CASE("regularity report arithmetic") {
    ExponentFit fit;
    fit.s0_hat = 1.0;
    RegularityReport plain = regularity_report(fit, std::nullopt);
    CHECK(plain.s0 == 1.0);
    CHECK(!plain.s_spacetime);

    RegularityReport timed = regularity_report(fit, std::make_pair(0.5, 2.0));
    REQUIRE(timed.s_spacetime.has_value());
    CHECK(*timed.s_spacetime == doctest::Approx(0.75));

    fit.s0_hat = -0.3;
    CHECK(regularity_report(fit, std::nullopt).s0 == doctest::Approx(-0.3));
}

TEST_CASE("product bound: single factor has ratio one") {
    ObjectSpec z;
    z.kind = ObjectKind::z;
    z.params = params(4);
    RatioReport rep = product_bound_check({z}, 0.2, -4, 4);
    for (const auto& e : rep.entries)
        if (e.rhs > 0.0) CHECK(e.ratio == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("product bound: Z x Z has ratio exactly 2") {
    ObjectSpec z;
    z.kind = ObjectKind::z;
    z.params = params(8);
    RatioReport rep = product_bound_check({z, z}, 0.3, -16, 16);
    for (const auto& e : rep.entries) {
        if (e.rhs > 0.0) CHECK(e.ratio == doctest::Approx(2.0).epsilon(1e-9));
    }
    CHECK(rep.sup == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("product bound: :Z^2: x Z is n-independent (ratio 3)") {
    ObjectSpec w;
    w.kind = ObjectKind::wick_power;
    w.ell = 2;
    w.params = params(4);
    ObjectSpec z;
    z.kind = ObjectKind::z;
    z.params = params(4);
    RatioReport rep = product_bound_check({w, z}, 0.3, -8, 8);
    CHECK(rep.sup / rep.inf < 1.1);
    CHECK(rep.sup == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("chaos decomposition residual: time-frozen products") {
    ObjectSpec z;
    z.kind = ObjectKind::z;
    z.params = params(4);
    ObjectSpec w;
    w.kind = ObjectKind::wick_power;
    w.ell = 2;
    w.params = params(4);

    DecompositionCheck zz = chaos_decomposition_check({z, z}, 0.4, FreqVec{1});
    CHECK(zz.projected.size() == 2);
    CHECK(zz.residual <= 1e-9);
    CHECK(zz.full > 0.0);

    DecompositionCheck wz = chaos_decomposition_check({w, z}, 0.4, FreqVec{0});
    CHECK(wz.residual <= 1e-9);
}

TEST_CASE("chaos decomposition residual: duhamel instance") {
    ObjectSpec w;
    w.kind = ObjectKind::wick_power;
    w.ell = 2;
    w.params = params(2);
    ObjectSpec dj;
    dj.kind = ObjectKind::duhamel_wick;
    dj.k = 2;
    dj.params = params(2);

    DecompositionCheck chk = chaos_decomposition_check({w, dj}, 0.3, FreqVec{1}, 16);
    CHECK(chk.full > 0.0);
    CHECK(chk.residual <= 1e-6 * std::max(1.0, chk.full));
}

TEST_CASE("decomposition check rejects oversized instances") {
    ObjectSpec w;
    w.kind = ObjectKind::wick_power;
    w.ell = 4;
    w.params = params(4);
    CHECK_THROWS_AS((void)chaos_decomposition_check({w, w}, 0.1, FreqVec{0}),
                    std::invalid_argument);
}

TEST_CASE("moment table CSV round trip") {
    MomentTable t;
    MomentEntry a;
    a.is_shell = true;
    a.shell = 3;
    a.estimate = 0.125;
    a.stderr_ = 0.001;
    a.samples = 100;
    MomentEntry b;
    b.n = FreqVec{-5};
    b.estimate = 2.0;
    b.samples = 7;
    t.entries = {a, b};
    MomentTable back = moment_table_from_csv(moment_table_csv(t));
    REQUIRE(back.entries.size() == 2);
    CHECK(back.entries[0].is_shell);
    CHECK(back.entries[0].shell == 3);
    CHECK(back.entries[0].estimate == 0.125);
    CHECK(back.entries[1].n == FreqVec{-5});
    CHECK(back.entries[1].samples == 7);
}
