#pragma once

#include <vector>

#include "bvq/field.hpp"
#include "bvq/rng.hpp"

namespace bvq {

// Streamfunction description for analytic divergence-free fields:
//   psi(x,y) = offset + sum_m A_m * sin(2*pi*mx*x/Lx + px) * sin(2*pi*my*y/Ly + py)
// with velocities taken as the discrete curl u = D_y psi, v = -D_x psi on the
// periodic grid. The discrete central-difference divergence of such a field
// cancels term by term; with power-of-two grid spacing and psi snapped to a
// dyadic lattice the cancellation is exact in f32, not just to rounding.
struct StreamMode {
    double amplitude = 1.0;
    int mx = 1;
    int my = 1;
    double phase_x = 0.0;
    double phase_y = 0.0;
};

struct StreamSpec {
    std::vector<StreamMode> modes;
    double offset = 0.0;
    bool snap_to_lattice = true;  // round psi to multiples of 2^-11
};

// Periodic grids only (the construction relies on wraparound). Output has
// C=2 channels (u, v) and `frames` identical time steps.
FieldTensor synth_divfree(uint32_t h, uint32_t w, double dx, double dy, const StreamSpec& spec,
                          uint32_t frames = 1);

// Evaluates the (snapped) streamfunction itself; exposed for tests.
Tensor synth_streamfunction(uint32_t h, uint32_t w, double dx, double dy, const StreamSpec& spec);

StreamSpec random_band_limited_spec(Rng& rng, int max_mode, double total_amplitude);

}  // namespace bvq
