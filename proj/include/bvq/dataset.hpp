#pragma once

#include <string>
#include <vector>

#include "bvq/field.hpp"

namespace bvq {

enum class Provenance : uint8_t { Original = 0, Pseudo = 1 };

// One supervised pair: `input` (T_in,C,H,W) and `target` (T_out,C,H,W) share
// channel count and spatial dims.
struct SampleWindow {
    Tensor input;
    Tensor target;
    Provenance provenance = Provenance::Original;
};

// Per-channel affine normalization. Computed from original-provenance samples
// only; a degenerate channel gets its std clamped to 1.
struct NormStats {
    std::vector<float> mean;
    std::vector<float> std;
};

struct Dataset {
    std::vector<SampleWindow> samples;
    uint32_t t_in = 0, t_out = 0, c = 0, h = 0, w = 0;
    float dx = 1.0f, dy = 1.0f;
    Boundary boundary = Boundary::Periodic;
    std::string descriptor;  // human-readable source note, not persisted

    size_t size() const { return samples.size(); }
    void validate_sample(const SampleWindow& s) const;
    void push(SampleWindow s);
};

// Chronological sliding windows over one trajectory. Yields
// floor((T_total - T_in - T_out)/stride) + 1 windows; errors when the
// trajectory is too short.
Dataset window_dataset(const FieldTensor& field, uint32_t t_in, uint32_t t_out, uint32_t stride);

// Contiguous time-block split (fractions over total frames) so that windows
// from different splits never share time ranges.
struct SplitFields {
    FieldTensor train, val, test;
};
SplitFields split_time_blocks(const FieldTensor& field, double train_frac, double val_frac);

NormStats compute_stats(const Dataset& ds);
Tensor normalize(const Tensor& tchw, const NormStats& stats);    // (T,C,H,W)
Tensor denormalize(const Tensor& tchw, const NormStats& stats);

// "BVQD" container: magic, u32 version=1, u32 count, u32 T_in, T_out, C, H, W,
// f32 dx, dy, u8 boundary tag, then per sample u8 provenance + f32 payloads.
// All integers little-endian. Saving an empty dataset is an error.
constexpr uint32_t kDatasetVersion = 1;
void save_dataset(const std::string& path, const Dataset& ds);
Dataset load_dataset(const std::string& path);

}  // namespace bvq
