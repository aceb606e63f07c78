#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "bvq/error.hpp"

namespace bvq {

using Shape = std::vector<uint32_t>;

inline size_t shape_numel(const Shape& s) {
    size_t n = 1;
    for (uint32_t e : s) n *= e;
    return n;
}

inline std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << ")";
    return os.str();
}

// Dense row-major f32 tensor. Plain value type; the autodiff graph and the
// models all store their numbers in these.
struct Tensor {
    Shape shape;
    std::vector<float> data;

    Tensor() = default;
    explicit Tensor(Shape s) : shape(std::move(s)), data(shape_numel(shape), 0.0f) {}
    Tensor(Shape s, std::vector<float> d) : shape(std::move(s)), data(std::move(d)) {
        if (data.size() != shape_numel(shape))
            data_error("tensor data length " + std::to_string(data.size()) +
                       " does not match shape " + shape_str(shape));
    }

    size_t numel() const { return data.size(); }
    bool empty() const { return data.empty(); }

    float& operator[](size_t i) { return data[i]; }
    float operator[](size_t i) const { return data[i]; }

    // 4D accessors (t,c,h,w); used by field/window code paths.
    float& at4(size_t t, size_t c, size_t h, size_t w) {
        return data[((t * shape[1] + c) * shape[2] + h) * shape[3] + w];
    }
    float at4(size_t t, size_t c, size_t h, size_t w) const {
        return data[((t * shape[1] + c) * shape[2] + h) * shape[3] + w];
    }
    float& at3(size_t c, size_t h, size_t w) {
        return data[(c * shape[1] + h) * shape[2] + w];
    }
    float at3(size_t c, size_t h, size_t w) const {
        return data[(c * shape[1] + h) * shape[2] + w];
    }
    float& at2(size_t r, size_t c) { return data[r * shape[1] + c]; }
    float at2(size_t r, size_t c) const { return data[r * shape[1] + c]; }

    Tensor reshaped(Shape s) const {
        if (shape_numel(s) != numel())
            data_error("reshape " + shape_str(shape) + " -> " + shape_str(s) + ": element count differs");
        Tensor out;
        out.shape = std::move(s);
        out.data = data;
        return out;
    }

    bool all_finite() const {
        for (float v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }

    static Tensor zeros(Shape s) { return Tensor(std::move(s)); }
    static Tensor full(Shape s, float v) {
        Tensor t(std::move(s));
        std::fill(t.data.begin(), t.data.end(), v);
        return t;
    }
};

inline bool same_shape(const Tensor& a, const Tensor& b) { return a.shape == b.shape; }

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!same_shape(a, b))
        data_error(std::string(op) + ": shape mismatch " + shape_str(a.shape) + " vs " + shape_str(b.shape));
}

}  // namespace bvq
