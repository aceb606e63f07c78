#include "bvq/swe.hpp"

#include <cmath>
#include <vector>

#include "bvq/rng.hpp"

namespace bvq {

namespace {

struct State {
    // conservative variables, f64
    std::vector<double> h, hu, hv;
    uint32_t H, W;
    double& at(std::vector<double>& a, uint32_t i, uint32_t j) { return a[i * W + j]; }
};

inline uint32_t wrap(int i, uint32_t n) {
    int m = i % static_cast<int>(n);
    return static_cast<uint32_t>(m < 0 ? m + static_cast<int>(n) : m);
}

}  // namespace

SweInitial swe_initial_condition(const SweParams& p) {
    Rng rng(p.seed);
    SweInitial init;
    init.height = Tensor::full({p.h, p.w}, static_cast<float>(p.mean_depth));
    init.u = Tensor::zeros({p.h, p.w});
    init.v = Tensor::zeros({p.h, p.w});
    for (uint32_t b = 0; b < p.bumps; ++b) {
        const double ci = rng.uniform(0.0, static_cast<double>(p.h));
        const double cj = rng.uniform(0.0, static_cast<double>(p.w));
        const double amp = p.bump_amplitude * rng.uniform(0.5, 1.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
        const double sigma = rng.uniform(0.06, 0.12) * std::min(p.h, p.w);
        for (uint32_t i = 0; i < p.h; ++i)
            for (uint32_t j = 0; j < p.w; ++j) {
                // periodic distance to the bump centre
                double di = std::abs(static_cast<double>(i) - ci);
                di = std::min(di, p.h - di);
                double dj = std::abs(static_cast<double>(j) - cj);
                dj = std::min(dj, p.w - dj);
                const double r2 = (di * di + dj * dj) / (2.0 * sigma * sigma);
                init.height.at2(i, j) += static_cast<float>(amp * std::exp(-r2));
            }
    }
    return init;
}

FieldTensor generate_swe(const SweParams& p) { return generate_swe(p, swe_initial_condition(p)); }

FieldTensor generate_swe(const SweParams& p, const SweInitial& init) {
    if (p.steps < 1) data_error("generate_swe: steps must be >= 1");
    if (init.height.shape != Shape{p.h, p.w} || init.u.shape != Shape{p.h, p.w} || init.v.shape != Shape{p.h, p.w})
        data_error("generate_swe: initial condition shape mismatch");

    const uint32_t H = p.h, W = p.w;
    State s;
    s.H = H;
    s.W = W;
    s.h.resize(H * W);
    s.hu.resize(H * W);
    s.hv.resize(H * W);
    for (size_t i = 0; i < s.h.size(); ++i) {
        const double h0 = init.height.data[i];
        if (!(h0 > 0.0)) data_error("generate_swe: initial height must be positive everywhere");
        s.h[i] = h0;
        s.hu[i] = h0 * init.u.data[i];
        s.hv[i] = h0 * init.v.data[i];
    }

    auto max_speed = [&](double& sx, double& sy) {
        sx = 0.0;
        sy = 0.0;
        for (size_t i = 0; i < s.h.size(); ++i) {
            const double c = std::sqrt(p.gravity * s.h[i]);
            sx = std::max(sx, std::abs(s.hu[i] / s.h[i]) + c);
            sy = std::max(sy, std::abs(s.hv[i] / s.h[i]) + c);
        }
    };

    double sx, sy;
    max_speed(sx, sy);
    const double dmin = std::min(p.dx, p.dy);
    const double smax0 = std::max(sx, sy);
    const double dt = p.dt > 0.0 ? p.dt : p.cfl_target * dmin / smax0;
    {
        const double cfl0 = dt * smax0 / dmin;
        if (!(cfl0 < 0.5))
            numeric_error("generate_swe: initial CFL " + std::to_string(cfl0) + " violates the < 0.5 bound");
    }

    FieldTensor out(Tensor::zeros({p.steps, 3, H, W}), static_cast<float>(p.dx), static_cast<float>(p.dy),
                    Boundary::Periodic);

    auto record = [&](uint32_t frame) {
        for (uint32_t i = 0; i < H; ++i)
            for (uint32_t j = 0; j < W; ++j) {
                const size_t k = i * W + j;
                out.values.at4(frame, 0, i, j) = static_cast<float>(s.hu[k] / s.h[k]);
                out.values.at4(frame, 1, i, j) = static_cast<float>(s.hv[k] / s.h[k]);
                out.values.at4(frame, 2, i, j) = static_cast<float>(s.h[k]);
            }
    };
    record(0);

    std::vector<double> nh(H * W), nhu(H * W), nhv(H * W);
    // physical fluxes per direction of the conservative system
    auto flux_x = [&](size_t k, double f[3]) {
        const double h = s.h[k], u = s.hu[k] / h, hv = s.hv[k];
        f[0] = s.hu[k];
        f[1] = s.hu[k] * u + 0.5 * p.gravity * h * h;
        f[2] = hv * u;
    };
    auto flux_y = [&](size_t k, double f[3]) {
        const double h = s.h[k], v = s.hv[k] / h, hu = s.hu[k];
        f[0] = s.hv[k];
        f[1] = hu * v;
        f[2] = s.hv[k] * v + 0.5 * p.gravity * h * h;
    };

    for (uint32_t step = 1; step < p.steps; ++step) {
        max_speed(sx, sy);
        const double cfl = dt * std::max(sx, sy) / dmin;
        if (!(cfl < 0.5))
            numeric_error("generate_swe: CFL " + std::to_string(cfl) + " at step " + std::to_string(step) +
                          " violates the < 0.5 bound");

        const double ax = sx, ay = sy;  // global Lax-Friedrichs speeds
        for (uint32_t i = 0; i < H; ++i)
            for (uint32_t j = 0; j < W; ++j) {
                const size_t k = i * W + j;
                const size_t ke = i * W + wrap(static_cast<int>(j) + 1, W);
                const size_t kw = i * W + wrap(static_cast<int>(j) - 1, W);
                const size_t kn = wrap(static_cast<int>(i) + 1, H) * W + j;
                const size_t ks = wrap(static_cast<int>(i) - 1, H) * W + j;

                double fk[3], fe[3], fw[3], gk[3], gn[3], gs[3];
                flux_x(k, fk);
                flux_x(ke, fe);
                flux_x(kw, fw);
                flux_y(k, gk);
                flux_y(kn, gn);
                flux_y(ks, gs);

                const double uk[3] = {s.h[k], s.hu[k], s.hv[k]};
                const double ue[3] = {s.h[ke], s.hu[ke], s.hv[ke]};
                const double uw[3] = {s.h[kw], s.hu[kw], s.hv[kw]};
                const double un[3] = {s.h[kn], s.hu[kn], s.hv[kn]};
                const double us[3] = {s.h[ks], s.hu[ks], s.hv[ks]};

                double next[3];
                for (int q = 0; q < 3; ++q) {
                    const double fe_half = 0.5 * (fk[q] + fe[q]) - 0.5 * ax * (ue[q] - uk[q]);
                    const double fw_half = 0.5 * (fw[q] + fk[q]) - 0.5 * ax * (uk[q] - uw[q]);
                    const double gn_half = 0.5 * (gk[q] + gn[q]) - 0.5 * ay * (un[q] - uk[q]);
                    const double gs_half = 0.5 * (gs[q] + gk[q]) - 0.5 * ay * (uk[q] - us[q]);
                    next[q] = uk[q] - dt / p.dx * (fe_half - fw_half) - dt / p.dy * (gn_half - gs_half);
                }
                nh[k] = next[0];
                nhu[k] = next[1];
                nhv[k] = next[2];
            }

        s.h.swap(nh);
        s.hu.swap(nhu);
        s.hv.swap(nhv);

        for (size_t k = 0; k < s.h.size(); ++k) {
            if (!std::isfinite(s.h[k]) || !std::isfinite(s.hu[k]) || !std::isfinite(s.hv[k]))
                numeric_error("generate_swe: non-finite state at step " + std::to_string(step));
            if (!(s.h[k] > 0.0))
                numeric_error("generate_swe: non-positive height at step " + std::to_string(step));
        }
        record(step);
    }
    return out;
}

double swe_volume(const FieldTensor& f, uint32_t frame) {
    if (f.c() < 3) data_error("swe_volume: field has no height channel");
    double acc = 0.0;
    for (uint32_t i = 0; i < f.h(); ++i)
        for (uint32_t j = 0; j < f.w(); ++j) acc += static_cast<double>(f.values.at4(frame, 2, i, j));
    return acc * f.dx * f.dy;
}

}  // namespace bvq
