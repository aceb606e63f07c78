#pragma once

// Test-only reference implementations, kept independent of the production
// code paths they check: f64 forward evaluators for finite-difference
// gradient oracles, exhaustive searches, and brute-force metric recomputes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace oracle {

using vecd = std::vector<double>;

inline vecd matmul(const vecd& a, size_t m, size_t k, const vecd& b, size_t n) {
    vecd y(m * n, 0.0);
    for (size_t i = 0; i < m; ++i)
        for (size_t kk = 0; kk < k; ++kk)
            for (size_t j = 0; j < n; ++j) y[i * n + j] += a[i * k + kk] * b[kk * n + j];
    return y;
}

inline vecd add_cols(const vecd& x, size_t rows, size_t cols, const vecd& b) {
    vecd y = x;
    for (size_t i = 0; i < rows; ++i)
        for (size_t j = 0; j < cols; ++j) y[i * cols + j] += b[j];
    return y;
}

inline vecd sigmoid(const vecd& x) {
    vecd y = x;
    for (double& v : y) v = 1.0 / (1.0 + std::exp(-v));
    return y;
}

inline vecd relu(const vecd& x) {
    vecd y = x;
    for (double& v : y) v = v > 0.0 ? v : 0.0;
    return y;
}

inline double mse(const vecd& a, const vecd& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    return acc / static_cast<double>(a.size());
}

inline double sum_squares(const vecd& a) {
    double acc = 0.0;
    for (double v : a) acc += v * v;
    return acc;
}

// Direct (non-FFT) cross-correlation conv, zero padding, floor output dims.
inline vecd conv2d(const vecd& x, size_t ci, size_t h, size_t w, const vecd& ker, size_t co, size_t kh,
                   size_t kw, int stride, int pad, size_t& ho, size_t& wo) {
    ho = (h + 2 * pad - kh) / stride + 1;
    wo = (w + 2 * pad - kw) / stride + 1;
    vecd y(co * ho * wo, 0.0);
    for (size_t oc = 0; oc < co; ++oc)
        for (size_t oh = 0; oh < ho; ++oh)
            for (size_t ow = 0; ow < wo; ++ow) {
                double acc = 0.0;
                for (size_t ic = 0; ic < ci; ++ic)
                    for (size_t dh = 0; dh < kh; ++dh)
                        for (size_t dw = 0; dw < kw; ++dw) {
                            const long ih = static_cast<long>(oh) * stride + static_cast<long>(dh) - pad;
                            const long iw = static_cast<long>(ow) * stride + static_cast<long>(dw) - pad;
                            if (ih < 0 || iw < 0 || ih >= static_cast<long>(h) || iw >= static_cast<long>(w))
                                continue;
                            acc += x[(ic * h + ih) * w + iw] * ker[((oc * ci + ic) * kh + dh) * kw + dw];
                        }
                y[(oc * ho + oh) * wo + ow] = acc;
            }
    return y;
}

inline vecd add_chw(const vecd& x, size_t c, size_t hw, const vecd& b) {
    vecd y = x;
    for (size_t ch = 0; ch < c; ++ch)
        for (size_t i = 0; i < hw; ++i) y[ch * hw + i] += b[ch];
    return y;
}

inline vecd upsample2x(const vecd& x, size_t c, size_t h, size_t w) {
    vecd y(c * 4 * h * w, 0.0);
    for (size_t ch = 0; ch < c; ++ch)
        for (size_t i = 0; i < h; ++i)
            for (size_t j = 0; j < w; ++j) {
                const double v = x[(ch * h + i) * w + j];
                y[(ch * 2 * h + 2 * i) * 2 * w + 2 * j] = v;
                y[(ch * 2 * h + 2 * i) * 2 * w + 2 * j + 1] = v;
                y[(ch * 2 * h + 2 * i + 1) * 2 * w + 2 * j] = v;
                y[(ch * 2 * h + 2 * i + 1) * 2 * w + 2 * j + 1] = v;
            }
    return y;
}

// Central finite differences of a scalar function over a flat parameter
// vector. The callable must evaluate in f64 end to end.
inline vecd fd_gradient(const std::function<double(const vecd&)>& f, const vecd& p, double h) {
    vecd g(p.size());
    for (size_t i = 0; i < p.size(); ++i) {
        vecd pp = p, pm = p;
        pp[i] += h;
        pm[i] -= h;
        g[i] = (f(pp) - f(pm)) / (2.0 * h);
    }
    return g;
}

// max_i |a_i - b_i| normalized by the gradient scale.
inline double grad_rel_error(const vecd& got, const vecd& want) {
    double scale = 1e-6, diff = 0.0;
    for (double v : want) scale = std::max(scale, std::abs(v));
    for (size_t i = 0; i < got.size(); ++i) diff = std::max(diff, std::abs(got[i] - want[i]));
    return diff / scale;
}

// Exhaustive nearest-code oracle: direct f64 distances, stable sort, lower
// index wins ties.
struct DistEntry {
    double d;
    uint32_t idx;
};
inline std::vector<DistEntry> full_distance_sort(const std::vector<float>& bank, size_t L, size_t D,
                                                 const std::vector<float>& q) {
    std::vector<DistEntry> out(L);
    for (size_t j = 0; j < L; ++j) {
        double acc = 0.0;
        for (size_t d = 0; d < D; ++d) {
            const double diff = static_cast<double>(q[d]) - static_cast<double>(bank[j * D + d]);
            acc += diff * diff;
        }
        out[j] = {acc, static_cast<uint32_t>(j)};
    }
    std::sort(out.begin(), out.end(), [](const DistEntry& a, const DistEntry& b) {
        if (a.d != b.d) return a.d < b.d;
        return a.idx < b.idx;
    });
    return out;
}

}  // namespace oracle
