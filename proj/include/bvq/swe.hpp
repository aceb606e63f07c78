#pragma once

#include <cstdint>

#include "bvq/field.hpp"

namespace bvq {

// 2D shallow-water benchmark generator. Conservative form, Lax-Friedrichs
// fluxes, periodic boundaries, explicit Euler in time; f64 internally so the
// telescoping flux sum conserves total height to rounding.
struct SweParams {
    uint32_t h = 64;
    uint32_t w = 64;
    uint32_t steps = 305;       // frames including the initial condition
    double dx = 1.0;
    double dy = 1.0;
    double gravity = 9.81;
    double cfl_target = 0.3;    // dt is derived from this at the initial condition
    double dt = 0.0;            // explicit time step; 0 derives it from cfl_target
    double mean_depth = 1.0;
    double bump_amplitude = 0.15;
    uint32_t bumps = 3;
    uint64_t seed = 0;
};

struct SweInitial {
    Tensor height;  // (H,W)
    Tensor u;       // (H,W), grid units per time unit
    Tensor v;       // (H,W)
};

// Seeded default initial condition: resting fluid with random Gaussian bumps.
SweInitial swe_initial_condition(const SweParams& p);

// Integrates and samples every step: output (steps, 3, H, W) with channels
// (u, v, h). Errors: CFL >= 0.5 at any step (refused, message carries the
// computed CFL), non-finite state or h <= 0 (message names the step).
FieldTensor generate_swe(const SweParams& p);
FieldTensor generate_swe(const SweParams& p, const SweInitial& init);

// Total fluid volume sum(h)*dx*dy of one frame; used by conservation checks.
double swe_volume(const FieldTensor& f, uint32_t frame);

}  // namespace bvq
