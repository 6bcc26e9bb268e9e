// Iterative radix-2 complex FFT, power-of-two sizes only. All product grids
// in this project are chosen as powers of two, so no general-size transform
// is needed; keeping the kernel local makes every call bit-reproducible.
#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace wicklab::fft {

using cplx = std::complex<double>;

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// In-place transform: sign=-1 computes X[k] = sum_j x[j] e^{-2pi i jk/M},
// sign=+1 the unnormalized inverse. Caller handles any 1/M scaling.
void transform(cplx* data, std::size_t m, int sign);

void transform(std::vector<cplx>& data, int sign);

// d-dimensional transform of a row-major M^d cube, applied axis by axis.
void transform_nd(cplx* data, int d, std::size_t m, int sign);

} // namespace wicklab::fft
