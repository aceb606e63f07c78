#include "bvq/synth.hpp"

#include <cmath>

namespace bvq {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kLattice = 1.0 / 2048.0;  // 2^-11
}  // namespace

Tensor synth_streamfunction(uint32_t h, uint32_t w, double dx, double dy, const StreamSpec& spec) {
    const double lx = w * dx, ly = h * dy;
    Tensor psi({h, w});
    for (uint32_t i = 0; i < h; ++i)
        for (uint32_t j = 0; j < w; ++j) {
            const double x = j * dx, y = i * dy;
            double v = spec.offset;
            for (const StreamMode& m : spec.modes)
                v += m.amplitude * std::sin(kTwoPi * m.mx * x / lx + m.phase_x) *
                     std::sin(kTwoPi * m.my * y / ly + m.phase_y);
            if (spec.snap_to_lattice) v = std::nearbyint(v / kLattice) * kLattice;
            psi.at2(i, j) = static_cast<float>(v);
        }
    return psi;
}

FieldTensor synth_divfree(uint32_t h, uint32_t w, double dx, double dy, const StreamSpec& spec,
                          uint32_t frames) {
    if (h < 3 || w < 3) data_error("synth_divfree: grid must be at least 3x3");
    if (frames < 1) data_error("synth_divfree: frames must be >= 1");
    // This constructor only makes sense on periodic grids; the caller cannot
    // ask for anything else.
    Tensor psi = synth_streamfunction(h, w, dx, dy, spec);

    FieldTensor out(Tensor::zeros({frames, 2, h, w}), static_cast<float>(dx), static_cast<float>(dy),
                    Boundary::Periodic);
    const float inv2dx = static_cast<float>(1.0 / (2.0 * dx));
    const float inv2dy = static_cast<float>(1.0 / (2.0 * dy));
    for (uint32_t i = 0; i < h; ++i) {
        const uint32_t in = (i + 1) % h, is = (i + h - 1) % h;
        for (uint32_t j = 0; j < w; ++j) {
            const uint32_t je = (j + 1) % w, jw = (j + w - 1) % w;
            const float u = (psi.at2(in, j) - psi.at2(is, j)) * inv2dy;
            const float v = -(psi.at2(i, je) - psi.at2(i, jw)) * inv2dx;
            for (uint32_t t = 0; t < frames; ++t) {
                out.values.at4(t, 0, i, j) = u;
                out.values.at4(t, 1, i, j) = v;
            }
        }
    }
    return out;
}

StreamSpec random_band_limited_spec(Rng& rng, int max_mode, double total_amplitude) {
    StreamSpec spec;
    const int n = 2 + static_cast<int>(rng.uniform_index(4));
    for (int k = 0; k < n; ++k) {
        StreamMode m;
        m.mx = 1 + static_cast<int>(rng.uniform_index(static_cast<uint64_t>(max_mode)));
        m.my = 1 + static_cast<int>(rng.uniform_index(static_cast<uint64_t>(max_mode)));
        m.amplitude = rng.uniform(0.2, 1.0);
        m.phase_x = rng.uniform(0.0, kTwoPi);
        m.phase_y = rng.uniform(0.0, kTwoPi);
        spec.modes.push_back(m);
    }
    double sum = 0.0;
    for (const StreamMode& m : spec.modes) sum += std::abs(m.amplitude);
    for (StreamMode& m : spec.modes) m.amplitude *= total_amplitude / sum;
    return spec;
}

}  // namespace bvq
