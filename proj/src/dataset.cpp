#include "bvq/dataset.hpp"

#include <cmath>

#include "bvq/binio.hpp"

namespace bvq {

void Dataset::validate_sample(const SampleWindow& s) const {
    if (s.input.shape != Shape{t_in, c, h, w})
        data_error("sample input shape " + shape_str(s.input.shape) + " does not match dataset (" +
                   shape_str({t_in, c, h, w}) + ")");
    if (s.target.shape != Shape{t_out, c, h, w})
        data_error("sample target shape " + shape_str(s.target.shape) + " does not match dataset (" +
                   shape_str({t_out, c, h, w}) + ")");
}

void Dataset::push(SampleWindow s) {
    validate_sample(s);
    samples.push_back(std::move(s));
}

Dataset window_dataset(const FieldTensor& field, uint32_t t_in, uint32_t t_out, uint32_t stride) {
    if (t_in < 1 || t_out < 1 || stride < 1) data_error("window_dataset: t_in, t_out, stride must be >= 1");
    const uint32_t total = field.t();
    if (total < t_in + t_out)
        data_error("window_dataset: trajectory of " + std::to_string(total) + " frames too short for " +
                   std::to_string(t_in) + "+" + std::to_string(t_out) + " windows");

    Dataset ds;
    ds.t_in = t_in;
    ds.t_out = t_out;
    ds.c = field.c();
    ds.h = field.h();
    ds.w = field.w();
    ds.dx = field.dx;
    ds.dy = field.dy;
    ds.boundary = field.boundary;

    const size_t frame = static_cast<size_t>(ds.c) * ds.h * ds.w;
    const uint32_t count = (total - t_in - t_out) / stride + 1;
    for (uint32_t k = 0; k < count; ++k) {
        const uint32_t start = k * stride;
        SampleWindow s;
        s.input = Tensor::zeros({t_in, ds.c, ds.h, ds.w});
        s.target = Tensor::zeros({t_out, ds.c, ds.h, ds.w});
        std::copy_n(field.values.data.data() + start * frame, t_in * frame, s.input.data.data());
        std::copy_n(field.values.data.data() + (start + t_in) * frame, t_out * frame, s.target.data.data());
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

SplitFields split_time_blocks(const FieldTensor& field, double train_frac, double val_frac) {
    if (!(train_frac > 0.0) || !(val_frac >= 0.0) || train_frac + val_frac >= 1.0)
        data_error("split_time_blocks: invalid fractions");
    const uint32_t total = field.t();
    const uint32_t n_train = static_cast<uint32_t>(total * train_frac);
    const uint32_t n_val = static_cast<uint32_t>(total * val_frac);
    const uint32_t n_test = total - n_train - n_val;
    if (n_train == 0 || n_val == 0 || n_test == 0) data_error("split_time_blocks: a split is empty");

    const size_t frame = static_cast<size_t>(field.c()) * field.h() * field.w();
    auto take = [&](uint32_t start, uint32_t len) {
        Tensor v = Tensor::zeros({len, field.c(), field.h(), field.w()});
        std::copy_n(field.values.data.data() + start * frame, static_cast<size_t>(len) * frame, v.data.data());
        return FieldTensor(std::move(v), field.dx, field.dy, field.boundary);
    };
    return SplitFields{take(0, n_train), take(n_train, n_val), take(n_train + n_val, n_test)};
}

NormStats compute_stats(const Dataset& ds) {
    if (ds.samples.empty()) data_error("compute_stats: empty dataset");
    const uint32_t c = ds.c;
    std::vector<double> sum(c, 0.0), sumsq(c, 0.0);
    std::vector<size_t> n(c, 0);
    auto accumulate = [&](const Tensor& t) {
        const uint32_t nt = t.shape[0];
        const size_t hw = static_cast<size_t>(t.shape[2]) * t.shape[3];
        for (uint32_t ti = 0; ti < nt; ++ti)
            for (uint32_t ci = 0; ci < c; ++ci) {
                const float* p = t.data.data() + ((static_cast<size_t>(ti) * c + ci) * hw);
                for (size_t i = 0; i < hw; ++i) {
                    sum[ci] += p[i];
                    sumsq[ci] += static_cast<double>(p[i]) * p[i];
                }
                n[ci] += hw;
            }
    };
    for (const SampleWindow& s : ds.samples) {
        if (s.provenance != Provenance::Original) continue;  // pseudo data never shapes the stats
        accumulate(s.input);
        accumulate(s.target);
    }
    if (n[0] == 0) data_error("compute_stats: no original-provenance samples");

    NormStats stats;
    stats.mean.resize(c);
    stats.std.resize(c);
    for (uint32_t ci = 0; ci < c; ++ci) {
        const double mean = sum[ci] / static_cast<double>(n[ci]);
        double var = sumsq[ci] / static_cast<double>(n[ci]) - mean * mean;
        if (var < 0.0) var = 0.0;
        double sd = std::sqrt(var);
        if (!(sd > 1e-12)) sd = 1.0;  // constant channel: clamp
        stats.mean[ci] = static_cast<float>(mean);
        stats.std[ci] = static_cast<float>(sd);
    }
    return stats;
}

namespace {

Tensor apply_affine(const Tensor& t, const NormStats& stats, bool forward) {
    if (t.shape.size() != 4) data_error("normalize: expected (T,C,H,W), got " + shape_str(t.shape));
    if (t.shape[1] != stats.mean.size()) data_error("normalize: channel count mismatch");
    Tensor out = t;
    const uint32_t nt = t.shape[0], c = t.shape[1];
    const size_t hw = static_cast<size_t>(t.shape[2]) * t.shape[3];
    for (uint32_t ti = 0; ti < nt; ++ti)
        for (uint32_t ci = 0; ci < c; ++ci) {
            float* p = out.data.data() + ((static_cast<size_t>(ti) * c + ci) * hw);
            const float mu = stats.mean[ci], sd = stats.std[ci];
            if (forward)
                for (size_t i = 0; i < hw; ++i) p[i] = (p[i] - mu) / sd;
            else
                for (size_t i = 0; i < hw; ++i) p[i] = p[i] * sd + mu;
        }
    return out;
}

}  // namespace

Tensor normalize(const Tensor& tchw, const NormStats& stats) { return apply_affine(tchw, stats, true); }
Tensor denormalize(const Tensor& tchw, const NormStats& stats) { return apply_affine(tchw, stats, false); }

void save_dataset(const std::string& path, const Dataset& ds) {
    if (ds.samples.empty()) data_error("save_dataset: refusing to save empty dataset");
    std::ofstream os(path, std::ios::binary);
    if (!os) data_error("cannot open '" + path + "' for writing");
    io::write_magic(os, "BVQD");
    io::write_u32(os, kDatasetVersion);
    io::write_u32(os, static_cast<uint32_t>(ds.samples.size()));
    io::write_u32(os, ds.t_in);
    io::write_u32(os, ds.t_out);
    io::write_u32(os, ds.c);
    io::write_u32(os, ds.h);
    io::write_u32(os, ds.w);
    io::write_f32(os, ds.dx);
    io::write_f32(os, ds.dy);
    io::write_u8(os, static_cast<uint8_t>(ds.boundary));
    for (const SampleWindow& s : ds.samples) {
        ds.validate_sample(s);
        io::write_u8(os, static_cast<uint8_t>(s.provenance));
        io::write_f32_array(os, s.input.data.data(), s.input.numel());
        io::write_f32_array(os, s.target.data.data(), s.target.numel());
    }
    os.flush();
    if (!os) data_error("write failed for '" + path + "'");
}

Dataset load_dataset(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) data_error("cannot open dataset '" + path + "'");
    io::check_magic(is, "BVQD", "dataset");
    const uint32_t version = io::read_u32(is, "dataset version");
    if (version != kDatasetVersion) data_error("unsupported dataset version " + std::to_string(version));
    const uint32_t count = io::read_u32(is, "sample count");
    Dataset ds;
    ds.t_in = io::read_u32(is, "T_in");
    ds.t_out = io::read_u32(is, "T_out");
    ds.c = io::read_u32(is, "C");
    ds.h = io::read_u32(is, "H");
    ds.w = io::read_u32(is, "W");
    ds.dx = io::read_f32(is, "dx");
    ds.dy = io::read_f32(is, "dy");
    const uint8_t btag = io::read_u8(is, "boundary tag");
    if (btag > 1) data_error("invalid boundary tag " + std::to_string(btag));
    ds.boundary = static_cast<Boundary>(btag);
    if (count == 0) data_error("dataset '" + path + "' is empty");
    for (uint32_t i = 0; i < count; ++i) {
        SampleWindow s;
        const uint8_t prov = io::read_u8(is, "provenance");
        if (prov > 1) data_error("invalid provenance tag " + std::to_string(prov));
        s.provenance = static_cast<Provenance>(prov);
        s.input = Tensor::zeros({ds.t_in, ds.c, ds.h, ds.w});
        s.target = Tensor::zeros({ds.t_out, ds.c, ds.h, ds.w});
        io::read_f32_array(is, s.input.data.data(), s.input.numel(), "sample input");
        io::read_f32_array(is, s.target.data.data(), s.target.numel(), "sample target");
        ds.samples.push_back(std::move(s));
    }
    ds.descriptor = path;
    return ds;
}

}  // namespace bvq
