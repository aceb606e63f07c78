#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace bvq::fft {

using cplx = std::complex<double>;

// Forward DFT, in place. Iterative radix-2 for power-of-two lengths, naive
// O(n^2) DFT otherwise (grids here are small).
void transform(std::vector<cplx>& a);

// Row-column 2D forward DFT of an h*w row-major buffer.
void transform2d(std::vector<cplx>& a, uint32_t h, uint32_t w);

}  // namespace bvq::fft
