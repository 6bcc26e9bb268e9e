#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "wicklab/field.hpp"
#include "wicklab/fft.hpp"

using namespace wicklab;

namespace {

SpectralField random_real_field(int d, int n, unsigned seed) {
    std::mt19937 gen(seed);
    std::normal_distribution<double> dist;
    SpectralField f(Lattice(d, n), true);
    const std::size_t sz = f.coeffs.size();
    for (std::size_t i = 0; i < sz / 2; ++i) {
        f.coeffs[i] = cplx(dist(gen), dist(gen));
        f.coeffs[sz - 1 - i] = std::conj(f.coeffs[i]);
    }
    f.coeffs[sz / 2] = cplx(dist(gen), 0.0);
    return f;
}

// brute-force convolution: (f1 * ... * fK)(n) = sum over frequency tuples
cplx brute_convolution(const std::vector<SpectralField>& fs, const FreqVec& n) {
    std::function<cplx(std::size_t, int)> rec = [&](std::size_t j, int rem) -> cplx {
        const Lattice& lat = fs[j].lattice;
        if (j + 1 == fs.size()) {
            FreqVec r{rem};
            return lat.contains(r) ? fs[j].at(r) : cplx(0.0, 0.0);
        }
        cplx acc(0.0, 0.0);
        for (int m = -lat.N; m <= lat.N; ++m) acc += fs[j].at(FreqVec{m}) * rec(j + 1, rem - m);
        return acc;
    };
    return rec(0, n[0]);
}

} // namespace

TEST_CASE("bracket values") {
    CHECK(bracket(FreqVec{0}) == doctest::Approx(1.0));
    CHECK(bracket(FreqVec{0, 0}) == doctest::Approx(1.0));
    CHECK(bracket(FreqVec{1}) == doctest::Approx(std::sqrt(2.0)));
    CHECK(bracket(FreqVec{1, 1}) == doctest::Approx(std::sqrt(3.0)));
    CHECK(bracket(FreqVec{-3}) == bracket(FreqVec{3}));
}

TEST_CASE("lattice enumeration is a bijection with involutive negation") {
    for (int d : {1, 2}) {
        Lattice lat(d, 3);
        std::vector<bool> seen(lat.size(), false);
        for (std::size_t i = 0; i < lat.size(); ++i) {
            FreqVec n = lat.freq_at(i);
            CHECK(lat.index_of(n) == i);
            CHECK(!seen[i]);
            seen[i] = true;
            FreqVec neg = n;
            for (int& c : neg) c = -c;
            CHECK(lat.index_of(neg) == lat.negate_index(i));
        }
    }
}

TEST_CASE("sobolev norm") {
    SpectralField zero(Lattice(1, 4), true);
    CHECK(sobolev_norm(zero, 1.3) == 0.0);

    SpectralField unit(Lattice(1, 4), true);
    unit.at(FreqVec{0}) = 1.0;
    CHECK(sobolev_norm(unit, -2.7) == doctest::Approx(1.0));

    SpectralField two(Lattice(1, 4), true);
    two.at(FreqVec{1}) = 1.0;
    two.at(FreqVec{-1}) = 1.0;
    CHECK(sobolev_norm(two, 1.0) == doctest::Approx(2.0)); // (2 * <1>^2)^(1/2) = 2
}

TEST_CASE("pointwise product: identity cases") {
    SpectralField g = random_real_field(1, 5, 11);

    std::vector<SpectralField> single{g};
    SpectralField same = pointwise_product(single);
    for (std::size_t i = 0; i < g.coeffs.size(); ++i)
        CHECK(std::abs(same.coeffs[i] - g.coeffs[i]) == 0.0);

    SpectralField one(Lattice(1, 5), true);
    one.at(FreqVec{0}) = 1.0;
    SpectralField prod = pointwise_product(std::vector<SpectralField>{one, g});
    for (std::size_t i = 0; i < g.coeffs.size(); ++i) {
        FreqVec n = g.lattice.freq_at(i);
        CHECK(std::abs(prod.at(n) - g.coeffs[i]) < 1e-13);
    }
}

TEST_CASE("pointwise product: cos^2 x = 1/2 + cos(2x)/2") {
    SpectralField f(Lattice(1, 1), true);
    f.at(FreqVec{1}) = 0.5;
    f.at(FreqVec{-1}) = 0.5;
    SpectralField sq = pointwise_product(std::vector<SpectralField>{f, f});
    CHECK(sq.lattice.N == 2);
    CHECK(sq.at(FreqVec{0}).real() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(sq.at(FreqVec{2}).real() == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(sq.at(FreqVec{-2}).real() == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(std::abs(sq.at(FreqVec{1})) < 1e-14);
}

TEST_CASE("dealiasing exactness against brute-force convolution") {
    for (int n : {2, 5, 8}) {
        for (int deg : {2, 3}) {
            std::vector<SpectralField> fs;
            for (int j = 0; j < deg; ++j) fs.push_back(random_real_field(1, n, unsigned(7 * n + j)));
            SpectralField prod = pointwise_product(fs);
            REQUIRE(prod.lattice.N == deg * n);
            double max_rel = 0.0;
            for (std::size_t i = 0; i < prod.coeffs.size(); ++i) {
                FreqVec m = prod.lattice.freq_at(i);
                cplx expect = brute_convolution(fs, m);
                double scale = std::max(1.0, std::abs(expect));
                max_rel = std::max(max_rel, std::abs(prod.coeffs[i] - expect) / scale);
            }
            CHECK(max_rel < 1e-10);
        }
    }
}

TEST_CASE("pointwise product is symmetric in its arguments") {
    SpectralField a = random_real_field(1, 6, 21);
    SpectralField b = random_real_field(1, 6, 22);
    SpectralField c = random_real_field(1, 6, 23);
    SpectralField p1 = pointwise_product(std::vector<SpectralField>{a, b, c});
    SpectralField p2 = pointwise_product(std::vector<SpectralField>{c, a, b});
    for (std::size_t i = 0; i < p1.coeffs.size(); ++i) {
        double scale = std::max(1e-30, std::abs(p1.coeffs[i]));
        CHECK(std::abs(p1.coeffs[i] - p2.coeffs[i]) / scale < 1e-12);
    }
}

TEST_CASE("mismatched lattices rejected") {
    SpectralField a = random_real_field(1, 4, 1);
    SpectralField b = random_real_field(1, 5, 2);
    CHECK_THROWS_AS(pointwise_product(std::vector<SpectralField>{a, b}), std::invalid_argument);
    SpectralField c = random_real_field(2, 4, 3);
    CHECK_THROWS_AS((void)pointwise_product_mixed(std::vector<SpectralField>{a, c}),
                    std::invalid_argument);
}

TEST_CASE("Parseval on the dealiased grid") {
    for (int d : {1, 2}) {
        SpectralField f = d == 1 ? random_real_field(1, 9, 31) : random_real_field(2, 4, 32);
        std::size_t m = grid_size_for(1, f.lattice.side());
        PhysGrid g = synthesize(f, m);
        double phys = 0.0;
        for (const cplx& v : g.data) phys += std::norm(v);
        phys /= double(g.data.size());
        double spec = 0.0;
        for (const cplx& v : f.coeffs) spec += std::norm(v);
        CHECK(phys == doctest::Approx(spec).epsilon(1e-10));
    }
}

TEST_CASE("reality of physical samples") {
    SpectralField f = random_real_field(2, 3, 41);
    PhysGrid g = synthesize(f, grid_size_for(1, f.lattice.side()));
    double max_val = 0.0, max_imag = 0.0;
    for (const cplx& v : g.data) {
        max_val = std::max(max_val, std::abs(v));
        max_imag = std::max(max_imag, std::abs(v.imag()));
    }
    CHECK(max_imag <= 1e-10 * max_val);
}

TEST_CASE("synthesize/analyze round trip") {
    SpectralField f = random_real_field(1, 7, 51);
    PhysGrid g = synthesize(f, grid_size_for(2, f.lattice.side()));
    SpectralField back = analyze(g, 7, true);
    for (std::size_t i = 0; i < f.coeffs.size(); ++i)
        CHECK(std::abs(back.coeffs[i] - f.coeffs[i]) < 1e-12);
}

TEST_CASE("WLF1 round trip is bit-exact") {
    SpectralField f = random_real_field(2, 3, 61);
    auto bytes = serialize_field(f);
    SpectralField g = deserialize_field(bytes);
    CHECK(g.lattice.d == f.lattice.d);
    CHECK(g.lattice.N == f.lattice.N);
    CHECK(g.real_flag == f.real_flag);
    for (std::size_t i = 0; i < f.coeffs.size(); ++i) CHECK(g.coeffs[i] == f.coeffs[i]);
}

TEST_CASE("WLF1 header size: d=1, N=0 single zero coefficient is 33 bytes") {
    SpectralField f(Lattice(1, 0), false);
    CHECK(serialize_field(f).size() == 33);
}

TEST_CASE("WLF1 malformed streams") {
    SpectralField f = random_real_field(1, 2, 71);
    auto bytes = serialize_field(f);

    auto truncated = bytes;
    truncated.resize(bytes.size() - 5);
    CHECK_THROWS_AS((void)deserialize_field(truncated), FormatError);

    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS_AS((void)deserialize_field(bad_magic), FormatError);

    auto bad_version = bytes;
    bad_version[4] = 9;
    CHECK_THROWS_AS((void)deserialize_field(bad_version), FormatError);
}

TEST_CASE("fft matches direct dft") {
    std::mt19937 gen(81);
    std::normal_distribution<double> dist;
    std::vector<cplx> x(16);
    for (auto& v : x) v = cplx(dist(gen), dist(gen));
    std::vector<cplx> y = x;
    fft::transform(y, -1);
    for (std::size_t k = 0; k < x.size(); ++k) {
        cplx direct(0.0, 0.0);
        for (std::size_t j = 0; j < x.size(); ++j) {
            double ang = -2.0 * M_PI * double(j * k) / double(x.size());
            direct += x[j] * cplx(std::cos(ang), std::sin(ang));
        }
        CHECK(std::abs(y[k] - direct) < 1e-10);
    }
}

TEST_CASE("truncate and embed") {
    SpectralField f = random_real_field(1, 6, 91);
    SpectralField t = truncate(f, 3);
    CHECK(t.lattice.N == 3);
    for (int n = -3; n <= 3; ++n) CHECK(t.at(FreqVec{n}) == f.at(FreqVec{n}));
    SpectralField e = embed(t, 6);
    CHECK(e.at(FreqVec{5}) == cplx(0.0, 0.0));
    CHECK(e.at(FreqVec{2}) == f.at(FreqVec{2}));
}
