#include "wicklab/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace wicklab::fft {

void transform(cplx* a, std::size_t m, int sign) {
    if (!is_pow2(m)) throw std::invalid_argument("fft: size must be a power of two");
    if (m <= 1) return;

    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < m; ++i) {
        std::size_t bit = m >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }

    for (std::size_t len = 2; len <= m; len <<= 1) {
        const double ang = double(sign) * 2.0 * M_PI / double(len);
        const cplx wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < m; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                cplx u = a[i + j];
                cplx v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

void transform(std::vector<cplx>& data, int sign) { transform(data.data(), data.size(), sign); }

void transform_nd(cplx* data, int d, std::size_t m, int sign) {
    if (d == 1) {
        transform(data, m, sign);
        return;
    }
    if (d != 2) throw std::invalid_argument("fft: only d=1 and d=2 grids are supported");
    // rows
    for (std::size_t r = 0; r < m; ++r) transform(data + r * m, m, sign);
    // columns, through a scratch strip
    std::vector<cplx> col(m);
    for (std::size_t c = 0; c < m; ++c) {
        for (std::size_t r = 0; r < m; ++r) col[r] = data[r * m + c];
        transform(col.data(), m, sign);
        for (std::size_t r = 0; r < m; ++r) data[r * m + c] = col[r];
    }
}

} // namespace wicklab::fft
