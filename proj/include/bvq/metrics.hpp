#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bvq/field.hpp"

namespace bvq {

// Kinetic energy per integer radial wavenumber shell. Shells partition all
// Fourier modes (k = round of the radial wavenumber), so the curve total
// equals half the summed velocity-fluctuation variances exactly up to
// rounding. Fluctuations are taken against each frame's spatial mean.
struct SpectrumCurve {
    std::vector<float> energy;  // index = shell wavenumber k, 0..k_max

    double total() const {
        double s = 0.0;
        for (float e : energy) s += e;
        return s;
    }
    std::string to_csv() const;  // two columns: k, E
};

double mean_abs_divergence(const FieldTensor& seq);

// Per-pixel temporal population variance of (u, v), halved sum; second member
// is the spatial mean. Errors for T = 1 (temporal fluctuations undefined).
std::pair<Tensor, double> tke(const FieldTensor& seq);

SpectrumCurve energy_spectrum(const FieldTensor& seq);
SpectrumCurve mean_spectrum(const std::vector<SpectrumCurve>& curves);

// L2 distance between log(1+E) curves, shorter curve zero-padded.
double spectrum_distance(const SpectrumCurve& a, const SpectrumCurve& b);

// Statistical metrics over shape-equal tensors.
double mse(const Tensor& pred, const Tensor& truth);
double rel_l2(const Tensor& pred, const Tensor& truth);  // errors when ||truth|| == 0

// Gaussian-window SSIM (7x7, sigma 1.5), constants C1=(0.01 L)^2, C2=(0.03 L)^2
// with L the value range of the truth tensor. 2D maps are computed per
// (frame, channel) slice over fully in-bounds windows and averaged.
double ssim(const Tensor& pred, const Tensor& truth);

struct MetricReport {
    double mse = 0.0;
    double rmse = 0.0;
    double rel_l2 = 0.0;
    double ssim = 0.0;
    double mean_abs_divergence = 0.0;
    double tke_pred = 0.0;
    double tke_true = 0.0;
    double tke_rel_error = 0.0;
    double spectrum_distance = 0.0;

    static std::string csv_header();
    std::string csv_row() const;
    std::string to_json() const;
};

MetricReport compute_report(const FieldTensor& pred, const FieldTensor& truth);

// Scalar physics-aware score, higher is better. The scalarization is
// configurable because candidate ranking must work without ground truth:
// neg_divergence is reference-free, spectrum_match compares against a
// climatological reference curve (e.g. the training-set mean spectrum), and
// composite mixes both. neg_mse_reference scores against a caller-provided
// sequence (used by the MSE-filtered ablation).
enum class ScorerKind { NegDivergence, SpectrumMatch, Composite, NegMseReference };

struct ScoreConfig {
    ScorerKind kind = ScorerKind::NegDivergence;
    std::optional<SpectrumCurve> reference;  // required by spectrum_match / composite w_spec != 0
    std::optional<Tensor> reference_frames;  // required by neg_mse_reference
    double w_div = 1.0;
    double w_spec = 0.0;

    void validate() const;
};

ScorerKind scorer_kind_from_string(const std::string& s);
std::string scorer_kind_to_string(ScorerKind k);

double physics_score(const FieldTensor& candidate, const ScoreConfig& config);

}  // namespace bvq
