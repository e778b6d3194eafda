#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace tsparse::fft {

using cxd = std::complex<double>;

// Unnormalized DFT, negative exponent: F[k] = sum_t f[t] exp(-2*pi*i*k*t/n).
// In-place. For 2D, data is a column-major n1 x n2 grid (index i + j*n1).
void forward(cxd* data, std::size_t n1, std::size_t n2 = 1);

// Unnormalized inverse (positive exponent, no 1/n scaling):
// inverse(forward(f)) == n * f.
void inverse(cxd* data, std::size_t n1, std::size_t n2 = 1);

inline void forward(std::vector<cxd>& v, std::size_t n1, std::size_t n2 = 1) {
  forward(v.data(), n1, n2);
}
inline void inverse(std::vector<cxd>& v, std::size_t n1, std::size_t n2 = 1) {
  inverse(v.data(), n1, n2);
}

}  // namespace tsparse::fft
