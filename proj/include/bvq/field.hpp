#pragma once

#include "bvq/tensor.hpp"

namespace bvq {

enum class Boundary : uint8_t { Periodic = 0, Clamped = 1 };

// Spatiotemporal field (T,C,H,W): velocity components in grid units per step,
// height in nondimensional units. Channel convention is (u, v, h); metrics
// that need velocity read channels 0-1.
struct FieldTensor {
    Tensor values;  // shape (T,C,H,W)
    float dx = 1.0f;
    float dy = 1.0f;
    Boundary boundary = Boundary::Periodic;

    FieldTensor() = default;
    FieldTensor(Tensor v, float dx_, float dy_, Boundary b) : values(std::move(v)), dx(dx_), dy(dy_), boundary(b) {
        validate();
    }

    uint32_t t() const { return values.shape[0]; }
    uint32_t c() const { return values.shape[1]; }
    uint32_t h() const { return values.shape[2]; }
    uint32_t w() const { return values.shape[3]; }

    void validate() const {
        if (values.shape.size() != 4) data_error("FieldTensor requires (T,C,H,W), got " + shape_str(values.shape));
        for (uint32_t e : values.shape)
            if (e < 1) data_error("FieldTensor extents must be >= 1, got " + shape_str(values.shape));
        if (!(dx > 0.0f) || !(dy > 0.0f)) data_error("FieldTensor grid spacing must be positive");
    }
};

}  // namespace bvq
