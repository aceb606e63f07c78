#include "bvq/fft.hpp"

#include <cmath>

namespace bvq::fft {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

bool is_pow2(size_t n) { return n && (n & (n - 1)) == 0; }

void fft_radix2(std::vector<cplx>& a) {
    const size_t n = a.size();
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang = -kTwoPi / static_cast<double>(len);
        const cplx wlen(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (size_t j = 0; j < len / 2; ++j) {
                const cplx u = a[i + j];
                const cplx v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

void dft_naive(std::vector<cplx>& a) {
    const size_t n = a.size();
    std::vector<cplx> out(n, cplx(0.0, 0.0));
    for (size_t k = 0; k < n; ++k) {
        for (size_t j = 0; j < n; ++j) {
            const double ang = -kTwoPi * static_cast<double>(k) * static_cast<double>(j) / static_cast<double>(n);
            out[k] += a[j] * cplx(std::cos(ang), std::sin(ang));
        }
    }
    a.swap(out);
}

}  // namespace

void transform(std::vector<cplx>& a) {
    if (a.size() <= 1) return;
    if (is_pow2(a.size()))
        fft_radix2(a);
    else
        dft_naive(a);
}

void transform2d(std::vector<cplx>& a, uint32_t h, uint32_t w) {
    std::vector<cplx> row(w), col(h);
    for (uint32_t i = 0; i < h; ++i) {
        std::copy_n(a.begin() + static_cast<size_t>(i) * w, w, row.begin());
        transform(row);
        std::copy_n(row.begin(), w, a.begin() + static_cast<size_t>(i) * w);
    }
    for (uint32_t j = 0; j < w; ++j) {
        for (uint32_t i = 0; i < h; ++i) col[i] = a[static_cast<size_t>(i) * w + j];
        transform(col);
        for (uint32_t i = 0; i < h; ++i) a[static_cast<size_t>(i) * w + j] = col[i];
    }
}

}  // namespace bvq::fft
