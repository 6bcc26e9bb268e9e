#include "wicklab/field.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "wicklab/fft.hpp"

namespace wicklab {

void SpacetimeField::validate() const {
    if (times.empty() || times.size() != frames.size())
        throw std::invalid_argument("SpacetimeField: time grid and frames must match");
    if (times.front() != 0.0) throw std::invalid_argument("SpacetimeField: grid must start at 0");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (times[i] <= times[i - 1])
            throw std::invalid_argument("SpacetimeField: times must be strictly increasing");
    for (const auto& fr : frames)
        if (fr.lattice != frames.front().lattice || fr.real_flag != frames.front().real_flag)
            throw std::invalid_argument("SpacetimeField: frames must share lattice and reality");
}

double sobolev_norm(const SpectralField& f, double s) {
    double acc = 0.0;
    const Lattice& lat = f.lattice;
    for (std::size_t i = 0; i < f.coeffs.size(); ++i) {
        double br = bracket(lat.freq_at(i));
        acc += std::pow(br, 2.0 * s) * std::norm(f.coeffs[i]);
    }
    return std::sqrt(acc);
}

bool has_conjugate_symmetry(const SpectralField& f) {
    const std::size_t sz = f.coeffs.size();
    for (std::size_t i = 0; i < sz; ++i) {
        if (f.coeffs[i] != std::conj(f.coeffs[sz - 1 - i])) return false;
    }
    return true;
}

void check_finite(const SpectralField& f, const std::string& what) {
    for (const cplx& c : f.coeffs)
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
            throw std::runtime_error(what + ": non-finite coefficient");
}

SpectralField zero_like(const SpectralField& f) { return SpectralField(f.lattice, f.real_flag); }

SpectralField truncate(const SpectralField& f, int n_new) {
    if (n_new > f.lattice.N) return embed(f, n_new);
    SpectralField out(Lattice(f.lattice.d, n_new), f.real_flag);
    for (std::size_t i = 0; i < out.coeffs.size(); ++i)
        out.coeffs[i] = f.at(out.lattice.freq_at(i));
    return out;
}

SpectralField embed(const SpectralField& f, int n_new) {
    if (n_new < f.lattice.N) return truncate(f, n_new);
    SpectralField out(Lattice(f.lattice.d, n_new), f.real_flag);
    for (std::size_t i = 0; i < f.coeffs.size(); ++i)
        out.at(f.lattice.freq_at(i)) = f.coeffs[i];
    return out;
}

static void require_same_lattice(const SpectralField& a, const SpectralField& b) {
    if (a.lattice != b.lattice)
        throw std::invalid_argument("field arithmetic: lattices differ");
}

SpectralField add(const SpectralField& a, const SpectralField& b) {
    require_same_lattice(a, b);
    SpectralField out = a;
    out.real_flag = a.real_flag && b.real_flag;
    for (std::size_t i = 0; i < out.coeffs.size(); ++i) out.coeffs[i] += b.coeffs[i];
    return out;
}

SpectralField sub(const SpectralField& a, const SpectralField& b) {
    require_same_lattice(a, b);
    SpectralField out = a;
    out.real_flag = a.real_flag && b.real_flag;
    for (std::size_t i = 0; i < out.coeffs.size(); ++i) out.coeffs[i] -= b.coeffs[i];
    return out;
}

SpectralField scale(const SpectralField& a, cplx s) {
    SpectralField out = a;
    if (s.imag() != 0.0) out.real_flag = false;
    for (auto& c : out.coeffs) c *= s;
    return out;
}

std::size_t grid_size_for(int degree, int side) {
    return fft::next_pow2(std::size_t(degree) * std::size_t(side));
}

PhysGrid synthesize(const SpectralField& f, std::size_t m) {
    const int d = f.lattice.d;
    if (m < std::size_t(f.lattice.side()))
        throw std::invalid_argument("synthesize: grid smaller than the coefficient box");
    PhysGrid g;
    g.d = d;
    g.m = m;
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) total *= m;
    g.data.assign(total, cplx(0.0, 0.0));

    // scatter coefficients at wrapped indices, then unnormalized inverse DFT
    for (std::size_t i = 0; i < f.coeffs.size(); ++i) {
        FreqVec n = f.lattice.freq_at(i);
        std::size_t idx = 0;
        for (int k = 0; k < d; ++k) {
            long long w = ((long long)n[k] % (long long)m + (long long)m) % (long long)m;
            idx = idx * m + std::size_t(w);
        }
        g.data[idx] += f.coeffs[i];
    }
    fft::transform_nd(g.data.data(), d, m, +1);
    return g;
}

SpectralField analyze(const PhysGrid& grid, int cutoff, bool real_flag) {
    const int d = grid.d;
    std::vector<cplx> work = grid.data;
    fft::transform_nd(work.data(), d, grid.m, -1);
    double inv = 1.0;
    for (int i = 0; i < d; ++i) inv /= double(grid.m);

    SpectralField out(Lattice(d, cutoff), real_flag);
    for (std::size_t i = 0; i < out.coeffs.size(); ++i) {
        FreqVec n = out.lattice.freq_at(i);
        std::size_t idx = 0;
        for (int k = 0; k < d; ++k) {
            long long w = ((long long)n[k] % (long long)grid.m + (long long)grid.m) % (long long)grid.m;
            idx = idx * grid.m + std::size_t(w);
        }
        out.coeffs[i] = work[idx] * inv;
    }
    if (real_flag) {
        // enforce exact conjugate symmetry against rounding drift
        const std::size_t sz = out.coeffs.size();
        for (std::size_t i = 0; i < sz / 2; ++i) {
            cplx avg = 0.5 * (out.coeffs[i] + std::conj(out.coeffs[sz - 1 - i]));
            out.coeffs[i] = avg;
            out.coeffs[sz - 1 - i] = std::conj(avg);
        }
        out.coeffs[sz / 2] = cplx(out.coeffs[sz / 2].real(), 0.0);
    }
    return out;
}

static SpectralField product_impl(std::span<const SpectralField> fs, bool mixed) {
    if (fs.empty()) throw std::invalid_argument("pointwise_product: empty factor list");
    const int d = fs[0].lattice.d;
    int side_sum = 0;
    int cutoff_sum = 0;
    bool real = true;
    for (const auto& f : fs) {
        if (f.lattice.d != d)
            throw std::invalid_argument("pointwise_product: lattice dimensions differ");
        if (!mixed && f.lattice != fs[0].lattice)
            throw std::invalid_argument("pointwise_product: factors must share a lattice");
        side_sum += f.lattice.side();
        cutoff_sum += f.lattice.N;
        real = real && f.real_flag;
    }
    if (fs.size() == 1) return fs[0];

    const std::size_t m = fft::next_pow2(std::size_t(side_sum));
    PhysGrid acc = synthesize(fs[0], m);
    for (std::size_t j = 1; j < fs.size(); ++j) {
        PhysGrid g = synthesize(fs[j], m);
        for (std::size_t i = 0; i < acc.data.size(); ++i) acc.data[i] *= g.data[i];
    }
    return analyze(acc, cutoff_sum, real);
}

SpectralField pointwise_product(std::span<const SpectralField> fs) { return product_impl(fs, false); }

SpectralField pointwise_product(const std::vector<SpectralField>& fs) {
    return product_impl(std::span<const SpectralField>(fs.data(), fs.size()), false);
}

SpectralField pointwise_product_mixed(std::span<const SpectralField> fs) {
    return product_impl(fs, true);
}

// --- WLF1 ------------------------------------------------------------------

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(std::uint8_t((v >> (8 * i)) & 0xff));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int i = 0; i < 8; ++i) out.push_back(std::uint8_t((bits >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[off + i]) << (8 * i);
    return v;
}

double get_f64(std::span<const std::uint8_t> b, std::size_t off) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= std::uint64_t(b[off + i]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

} // namespace

std::vector<std::uint8_t> serialize_field(const SpectralField& f) {
    std::vector<std::uint8_t> out;
    out.reserve(17 + 16 * f.coeffs.size());
    const char magic[4] = {'W', 'L', 'F', '1'};
    out.insert(out.end(), magic, magic + 4);
    put_u32(out, 1);
    put_u32(out, std::uint32_t(f.lattice.d));
    put_u32(out, std::uint32_t(f.lattice.N));
    out.push_back(f.real_flag ? 1 : 0);
    for (const cplx& c : f.coeffs) {
        put_f64(out, c.real());
        put_f64(out, c.imag());
    }
    return out;
}

SpectralField deserialize_field(std::span<const std::uint8_t> b) {
    if (b.size() < 17) throw FormatError("WLF1: stream shorter than header");
    if (std::memcmp(b.data(), "WLF1", 4) != 0) throw FormatError("WLF1: bad magic");
    std::uint32_t version = get_u32(b, 4);
    if (version != 1) throw FormatError("WLF1: unsupported version " + std::to_string(version));
    std::uint32_t d = get_u32(b, 8);
    std::uint32_t n = get_u32(b, 12);
    if (d < 1 || d > 8) throw FormatError("WLF1: bad dimension " + std::to_string(d));
    std::uint8_t rf = b[16];
    if (rf > 1) throw FormatError("WLF1: bad real_flag " + std::to_string(int(rf)));

    Lattice lat(static_cast<int>(d), static_cast<int>(n));
    const std::size_t expect = 17 + 16 * lat.size();
    if (b.size() != expect)
        throw FormatError("WLF1: payload length " + std::to_string(b.size()) + " bytes, expected " +
                          std::to_string(expect));

    SpectralField f(lat, rf == 1);
    for (std::size_t i = 0; i < f.coeffs.size(); ++i)
        f.coeffs[i] = cplx(get_f64(b, 17 + 16 * i), get_f64(b, 17 + 16 * i + 8));
    check_finite(f, "WLF1");
    if (f.real_flag && !has_conjugate_symmetry(f))
        throw FormatError("WLF1: real_flag set but coefficients are not conjugate-symmetric");
    return f;
}

void write_field(const std::string& path, const SpectralField& f) {
    auto bytes = serialize_field(f);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
}

SpectralField read_field(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                                    std::istreambuf_iterator<char>());
    return deserialize_field(bytes);
}

} // namespace wicklab
