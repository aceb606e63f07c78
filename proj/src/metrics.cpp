#include "bvq/metrics.hpp"

#include <cmath>
#include <sstream>

#include "bvq/fft.hpp"

namespace bvq {

namespace {

void require_velocity(const FieldTensor& f, const char* op) {
    if (f.c() < 2)
        data_error(std::string(op) + ": needs at least 2 velocity channels, field has " + std::to_string(f.c()));
}

}  // namespace

std::string SpectrumCurve::to_csv() const {
    std::ostringstream os;
    os << "k,E\n";
    for (size_t k = 0; k < energy.size(); ++k) os << k << "," << energy[k] << "\n";
    return os.str();
}

double mean_abs_divergence(const FieldTensor& seq) {
    require_velocity(seq, "mean_abs_divergence");
    if (seq.h() < 3 || seq.w() < 3) data_error("mean_abs_divergence: grid must be at least 3x3");
    const uint32_t T = seq.t(), H = seq.h(), W = seq.w();
    const bool periodic = seq.boundary == Boundary::Periodic;
    const double dx = seq.dx, dy = seq.dy;

    double acc = 0.0;
    for (uint32_t t = 0; t < T; ++t) {
        for (uint32_t i = 0; i < H; ++i) {
            for (uint32_t j = 0; j < W; ++j) {
                double dudx, dvdy;
                if (periodic) {
                    const uint32_t je = (j + 1) % W, jw = (j + W - 1) % W;
                    const uint32_t in = (i + 1) % H, is = (i + H - 1) % H;
                    dudx = (static_cast<double>(seq.values.at4(t, 0, i, je)) - seq.values.at4(t, 0, i, jw)) / (2.0 * dx);
                    dvdy = (static_cast<double>(seq.values.at4(t, 1, in, j)) - seq.values.at4(t, 1, is, j)) / (2.0 * dy);
                } else {
                    if (j == 0)
                        dudx = (static_cast<double>(seq.values.at4(t, 0, i, 1)) - seq.values.at4(t, 0, i, 0)) / dx;
                    else if (j == W - 1)
                        dudx = (static_cast<double>(seq.values.at4(t, 0, i, W - 1)) - seq.values.at4(t, 0, i, W - 2)) / dx;
                    else
                        dudx = (static_cast<double>(seq.values.at4(t, 0, i, j + 1)) - seq.values.at4(t, 0, i, j - 1)) /
                               (2.0 * dx);
                    if (i == 0)
                        dvdy = (static_cast<double>(seq.values.at4(t, 1, 1, j)) - seq.values.at4(t, 1, 0, j)) / dy;
                    else if (i == H - 1)
                        dvdy = (static_cast<double>(seq.values.at4(t, 1, H - 1, j)) - seq.values.at4(t, 1, H - 2, j)) / dy;
                    else
                        dvdy = (static_cast<double>(seq.values.at4(t, 1, i + 1, j)) - seq.values.at4(t, 1, i - 1, j)) /
                               (2.0 * dy);
                }
                acc += std::abs(dudx + dvdy);
            }
        }
    }
    return acc / (static_cast<double>(T) * H * W);
}

std::pair<Tensor, double> tke(const FieldTensor& seq) {
    require_velocity(seq, "tke");
    const uint32_t T = seq.t(), H = seq.h(), W = seq.w();
    if (T < 2) data_error("tke: needs T >= 2 frames, got " + std::to_string(T));

    Tensor field({H, W});
    double total = 0.0;
    for (uint32_t i = 0; i < H; ++i) {
        for (uint32_t j = 0; j < W; ++j) {
            double tkev = 0.0;
            for (uint32_t ch = 0; ch < 2; ++ch) {
                double mean = 0.0;
                for (uint32_t t = 0; t < T; ++t) mean += seq.values.at4(t, ch, i, j);
                mean /= T;
                double var = 0.0;
                for (uint32_t t = 0; t < T; ++t) {
                    const double d = seq.values.at4(t, ch, i, j) - mean;
                    var += d * d;
                }
                tkev += var / T;
            }
            tkev *= 0.5;
            field.at2(i, j) = static_cast<float>(tkev);
            total += tkev;
        }
    }
    return {std::move(field), total / (static_cast<double>(H) * W)};
}

SpectrumCurve energy_spectrum(const FieldTensor& seq) {
    require_velocity(seq, "energy_spectrum");
    const uint32_t T = seq.t(), H = seq.h(), W = seq.w();

    // normalized wavenumbers so rectangular grids share shell indices
    const double n_ref = static_cast<double>(std::max(H, W));
    const double sx = n_ref / W, sy = n_ref / H;
    auto shell_of = [&](uint32_t ki, uint32_t kj) {
        const double fy = (ki <= H / 2) ? static_cast<double>(ki) : static_cast<double>(ki) - H;
        const double fx = (kj <= W / 2) ? static_cast<double>(kj) : static_cast<double>(kj) - W;
        return static_cast<size_t>(std::lround(std::sqrt(fx * sx * fx * sx + fy * sy * fy * sy)));
    };

    size_t kmax = 0;
    for (uint32_t ki = 0; ki < H; ++ki)
        for (uint32_t kj = 0; kj < W; ++kj) kmax = std::max(kmax, shell_of(ki, kj));

    std::vector<double> shells(kmax + 1, 0.0);
    std::vector<fft::cplx> fu(static_cast<size_t>(H) * W), fv(fu.size());
    const double norm = static_cast<double>(H) * W;

    for (uint32_t t = 0; t < T; ++t) {
        double mu = 0.0, mv = 0.0;
        for (uint32_t i = 0; i < H; ++i)
            for (uint32_t j = 0; j < W; ++j) {
                mu += seq.values.at4(t, 0, i, j);
                mv += seq.values.at4(t, 1, i, j);
            }
        mu /= norm;
        mv /= norm;
        for (uint32_t i = 0; i < H; ++i)
            for (uint32_t j = 0; j < W; ++j) {
                fu[static_cast<size_t>(i) * W + j] = fft::cplx(seq.values.at4(t, 0, i, j) - mu, 0.0);
                fv[static_cast<size_t>(i) * W + j] = fft::cplx(seq.values.at4(t, 1, i, j) - mv, 0.0);
            }
        fft::transform2d(fu, H, W);
        fft::transform2d(fv, H, W);
        for (uint32_t ki = 0; ki < H; ++ki)
            for (uint32_t kj = 0; kj < W; ++kj) {
                const size_t idx = static_cast<size_t>(ki) * W + kj;
                const double e = 0.5 * (std::norm(fu[idx]) + std::norm(fv[idx])) / (norm * norm);
                if (!std::isfinite(e)) numeric_error("energy_spectrum: non-finite FFT output");
                shells[shell_of(ki, kj)] += e;
            }
    }

    SpectrumCurve curve;
    curve.energy.resize(shells.size());
    for (size_t k = 0; k < shells.size(); ++k) curve.energy[k] = static_cast<float>(shells[k] / T);
    return curve;
}

SpectrumCurve mean_spectrum(const std::vector<SpectrumCurve>& curves) {
    if (curves.empty()) data_error("mean_spectrum: no curves");
    size_t len = 0;
    for (const SpectrumCurve& c : curves) len = std::max(len, c.energy.size());
    SpectrumCurve out;
    out.energy.assign(len, 0.0f);
    for (const SpectrumCurve& c : curves)
        for (size_t k = 0; k < c.energy.size(); ++k) out.energy[k] += c.energy[k] / static_cast<float>(curves.size());
    return out;
}

double spectrum_distance(const SpectrumCurve& a, const SpectrumCurve& b) {
    const size_t len = std::max(a.energy.size(), b.energy.size());
    double acc = 0.0;
    for (size_t k = 0; k < len; ++k) {
        const double ea = k < a.energy.size() ? a.energy[k] : 0.0;
        const double eb = k < b.energy.size() ? b.energy[k] : 0.0;
        const double d = std::log1p(ea) - std::log1p(eb);
        acc += d * d;
    }
    return std::sqrt(acc);
}

double mse(const Tensor& pred, const Tensor& truth) {
    require_same_shape(pred, truth, "mse");
    double acc = 0.0;
    for (size_t i = 0; i < pred.numel(); ++i) {
        const double d = static_cast<double>(pred.data[i]) - truth.data[i];
        acc += d * d;
    }
    return acc / static_cast<double>(pred.numel());
}

double rel_l2(const Tensor& pred, const Tensor& truth) {
    require_same_shape(pred, truth, "rel_l2");
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < pred.numel(); ++i) {
        const double d = static_cast<double>(pred.data[i]) - truth.data[i];
        num += d * d;
        den += static_cast<double>(truth.data[i]) * truth.data[i];
    }
    if (den == 0.0) data_error("rel_l2: truth tensor is identically zero");
    return std::sqrt(num / den);
}

namespace {

// 7x7 Gaussian window, sigma 1.5, normalized.
const std::vector<double>& ssim_window() {
    static const std::vector<double> win = [] {
        std::vector<double> w(49);
        double sum = 0.0;
        for (int i = 0; i < 7; ++i)
            for (int j = 0; j < 7; ++j) {
                const double di = i - 3, dj = j - 3;
                w[i * 7 + j] = std::exp(-(di * di + dj * dj) / (2.0 * 1.5 * 1.5));
                sum += w[i * 7 + j];
            }
        for (double& v : w) v /= sum;
        return w;
    }();
    return win;
}

}  // namespace

double ssim(const Tensor& pred, const Tensor& truth) {
    require_same_shape(pred, truth, "ssim");
    if (pred.shape.size() != 4) data_error("ssim: expected (T,C,H,W), got " + shape_str(pred.shape));
    const uint32_t T = pred.shape[0], C = pred.shape[1], H = pred.shape[2], W = pred.shape[3];
    if (H < 7 || W < 7) data_error("ssim: grid smaller than the 7x7 window");

    float lo = truth.data[0], hi = truth.data[0];
    for (float v : truth.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    double range = static_cast<double>(hi) - lo;
    if (range == 0.0) range = 1.0;
    const double c1 = 0.01 * range * 0.01 * range;
    const double c2 = 0.03 * range * 0.03 * range;

    const std::vector<double>& win = ssim_window();
    double acc = 0.0;
    size_t count = 0;
    for (uint32_t t = 0; t < T; ++t)
        for (uint32_t ch = 0; ch < C; ++ch) {
            const float* px = pred.data.data() + ((static_cast<size_t>(t) * C + ch) * H) * W;
            const float* py = truth.data.data() + ((static_cast<size_t>(t) * C + ch) * H) * W;
            for (uint32_t i = 0; i + 7 <= H; ++i)
                for (uint32_t j = 0; j + 7 <= W; ++j) {
                    double mx = 0.0, my = 0.0;
                    for (int wi = 0; wi < 7; ++wi)
                        for (int wj = 0; wj < 7; ++wj) {
                            const double wgt = win[wi * 7 + wj];
                            mx += wgt * px[(i + wi) * W + j + wj];
                            my += wgt * py[(i + wi) * W + j + wj];
                        }
                    double vx = 0.0, vy = 0.0, cov = 0.0;
                    for (int wi = 0; wi < 7; ++wi)
                        for (int wj = 0; wj < 7; ++wj) {
                            const double wgt = win[wi * 7 + wj];
                            const double ddx = px[(i + wi) * W + j + wj] - mx;
                            const double ddy = py[(i + wi) * W + j + wj] - my;
                            vx += wgt * ddx * ddx;
                            vy += wgt * ddy * ddy;
                            cov += wgt * ddx * ddy;
                        }
                    acc += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
                           ((mx * mx + my * my + c1) * (vx + vy + c2));
                    ++count;
                }
        }
    return acc / static_cast<double>(count);
}

std::string MetricReport::csv_header() {
    return "mse,rmse,rel_l2,ssim,mean_abs_divergence,tke_pred,tke_true,tke_rel_error,spectrum_distance";
}

std::string MetricReport::csv_row() const {
    std::ostringstream os;
    os.precision(9);
    os << mse << "," << rmse << "," << rel_l2 << "," << ssim << "," << mean_abs_divergence << "," << tke_pred
       << "," << tke_true << "," << tke_rel_error << "," << spectrum_distance;
    return os.str();
}

std::string MetricReport::to_json() const {
    std::ostringstream os;
    os.precision(9);
    os << "{\"mse\":" << mse << ",\"rmse\":" << rmse << ",\"rel_l2\":" << rel_l2 << ",\"ssim\":" << ssim
       << ",\"mean_abs_divergence\":" << mean_abs_divergence << ",\"tke_pred\":" << tke_pred
       << ",\"tke_true\":" << tke_true << ",\"tke_rel_error\":" << tke_rel_error
       << ",\"spectrum_distance\":" << spectrum_distance << "}";
    return os.str();
}

MetricReport compute_report(const FieldTensor& pred, const FieldTensor& truth) {
    require_same_shape(pred.values, truth.values, "compute_report");
    MetricReport r;
    r.mse = mse(pred.values, truth.values);
    r.rmse = std::sqrt(r.mse);
    r.rel_l2 = rel_l2(pred.values, truth.values);
    r.ssim = ssim(pred.values, truth.values);
    r.mean_abs_divergence = mean_abs_divergence(pred);
    if (pred.t() >= 2) {
        r.tke_pred = tke(pred).second;
        r.tke_true = tke(truth).second;
        r.tke_rel_error = r.tke_true != 0.0 ? std::abs(r.tke_pred - r.tke_true) / r.tke_true : 0.0;
    }
    r.spectrum_distance = spectrum_distance(energy_spectrum(pred), energy_spectrum(truth));
    return r;
}

void ScoreConfig::validate() const {
    if (!std::isfinite(w_div) || !std::isfinite(w_spec)) config_error("ScoreConfig: weights must be finite");
    if ((kind == ScorerKind::SpectrumMatch || (kind == ScorerKind::Composite && w_spec != 0.0)) && !reference)
        config_error("ScoreConfig: spectrum scoring requires a reference spectrum");
    if (kind == ScorerKind::NegMseReference && !reference_frames)
        config_error("ScoreConfig: neg_mse_reference requires reference frames");
}

ScorerKind scorer_kind_from_string(const std::string& s) {
    if (s == "neg_divergence") return ScorerKind::NegDivergence;
    if (s == "spectrum_match") return ScorerKind::SpectrumMatch;
    if (s == "composite") return ScorerKind::Composite;
    if (s == "neg_mse_reference") return ScorerKind::NegMseReference;
    config_error("unknown scorer kind '" + s + "'");
}

std::string scorer_kind_to_string(ScorerKind k) {
    switch (k) {
        case ScorerKind::NegDivergence: return "neg_divergence";
        case ScorerKind::SpectrumMatch: return "spectrum_match";
        case ScorerKind::Composite: return "composite";
        case ScorerKind::NegMseReference: return "neg_mse_reference";
    }
    return "?";
}

double physics_score(const FieldTensor& candidate, const ScoreConfig& config) {
    config.validate();
    switch (config.kind) {
        case ScorerKind::NegDivergence:
            return -mean_abs_divergence(candidate);
        case ScorerKind::SpectrumMatch:
            return -spectrum_distance(energy_spectrum(candidate), *config.reference);
        case ScorerKind::Composite: {
            double s = config.w_div * -mean_abs_divergence(candidate);
            if (config.w_spec != 0.0)
                s += config.w_spec * -spectrum_distance(energy_spectrum(candidate), *config.reference);
            return s;
        }
        case ScorerKind::NegMseReference: {
            // Prefix candidates are matched against the leading frames of the
            // reference sequence.
            const Tensor& ref = *config.reference_frames;
            if (candidate.values.shape[0] > ref.shape[0])
                data_error("physics_score: candidate longer than the reference sequence");
            Tensor prefix = Tensor::zeros(candidate.values.shape);
            std::copy_n(ref.data.data(), prefix.numel(), prefix.data.data());
            return -mse(candidate.values, prefix);
        }
    }
    numeric_error("physics_score: unreachable");
}

}  // namespace bvq
