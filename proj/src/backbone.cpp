#include "bvq/backbone.hpp"

#include <cmath>

#include "bvq/checkpoint.hpp"
#include "bvq/codebank.hpp"

namespace bvq {

void BackboneConfig::validate() const {
    if (t_in < 1 || channels < 1 || chunk < 1) config_error("backbone: t_in, channels, chunk must be >= 1");
    if (enc_widths.empty()) config_error("backbone: enc_widths must not be empty");
    if (dec_widths.size() != enc_widths.size())
        config_error("backbone: dec_widths must mirror enc_widths (" + std::to_string(enc_widths.size()) +
                     " blocks)");
    const uint32_t f = downsample();
    if (h % f != 0 || w % f != 0)
        config_error("backbone: grid " + std::to_string(h) + "x" + std::to_string(w) +
                     " not divisible by downsample factor " + std::to_string(f));
    if (code_dim < 1) config_error("backbone: code_dim must be >= 1");
    for (uint32_t v : enc_widths)
        if (v < 1) config_error("backbone: enc_widths entries must be >= 1");
    for (uint32_t v : dec_widths)
        if (v < 1) config_error("backbone: dec_widths entries must be >= 1");
}

void ModelState::validate() const {
    cfg.validate();
    if (bank_cfg.dim != cfg.code_dim)
        config_error("model: bank dim " + std::to_string(bank_cfg.dim) + " != code_dim " +
                     std::to_string(cfg.code_dim));
    auto need = [&](const std::string& name, const Shape& s) {
        auto it = params.find(name);
        if (it == params.end()) data_error("model: missing parameter '" + name + "'");
        if (it->second.shape != s)
            data_error("model: parameter '" + name + "' has shape " + shape_str(it->second.shape) +
                       ", expected " + shape_str(s));
    };
    uint32_t in_ch = cfg.t_in * cfg.channels;
    for (size_t i = 0; i < cfg.enc_widths.size(); ++i) {
        need("enc.conv" + std::to_string(i) + ".w", {cfg.enc_widths[i], in_ch, 3, 3});
        need("enc.conv" + std::to_string(i) + ".b", {cfg.enc_widths[i]});
        in_ch = cfg.enc_widths[i];
    }
    need("proj.w", {cfg.token_dim(), cfg.code_dim});
    need("proj.b", {cfg.code_dim});
    in_ch = cfg.code_dim;
    for (size_t i = 0; i < cfg.dec_widths.size(); ++i) {
        need("dec.conv" + std::to_string(i) + ".w", {cfg.dec_widths[i], in_ch, 3, 3});
        need("dec.conv" + std::to_string(i) + ".b", {cfg.dec_widths[i]});
        in_ch = cfg.dec_widths[i];
    }
    need("dec.out.w", {cfg.chunk * cfg.channels, cfg.dec_widths.back(), 1, 1});
    need("dec.out.b", {cfg.chunk * cfg.channels});
    need("codebank", {bank_cfg.size, bank_cfg.dim});
}

namespace {
uint32_t input_channels(const BackboneConfig& cfg) { return cfg.t_in * cfg.channels; }
}  // namespace

ModelState init_model(const BackboneConfig& cfg, const BankConfig& bank, uint64_t seed) {
    cfg.validate();
    Rng rng(seed);
    ModelState m;
    m.cfg = cfg;
    m.bank_cfg = bank;

    auto he_conv = [&](uint32_t co, uint32_t ci, uint32_t kh, uint32_t kw) {
        Tensor w({co, ci, kh, kw});
        const double std = std::sqrt(2.0 / (static_cast<double>(ci) * kh * kw));
        for (float& v : w.data) v = static_cast<float>(rng.normal(0.0, std));
        return w;
    };

    uint32_t in_ch = input_channels(cfg);
    for (size_t i = 0; i < cfg.enc_widths.size(); ++i) {
        m.params["enc.conv" + std::to_string(i) + ".w"] = he_conv(cfg.enc_widths[i], in_ch, 3, 3);
        m.params["enc.conv" + std::to_string(i) + ".b"] = Tensor::zeros({cfg.enc_widths[i]});
        in_ch = cfg.enc_widths[i];
    }
    {
        Tensor w({cfg.token_dim(), cfg.code_dim});
        const double bound = std::sqrt(6.0 / (static_cast<double>(cfg.token_dim()) + cfg.code_dim));
        for (float& v : w.data) v = static_cast<float>(rng.uniform(-bound, bound));
        m.params["proj.w"] = std::move(w);
        m.params["proj.b"] = Tensor::zeros({cfg.code_dim});
    }
    in_ch = cfg.code_dim;
    for (size_t i = 0; i < cfg.dec_widths.size(); ++i) {
        m.params["dec.conv" + std::to_string(i) + ".w"] = he_conv(cfg.dec_widths[i], in_ch, 3, 3);
        m.params["dec.conv" + std::to_string(i) + ".b"] = Tensor::zeros({cfg.dec_widths[i]});
        in_ch = cfg.dec_widths[i];
    }
    m.params["dec.out.w"] = he_conv(cfg.chunk * cfg.channels, cfg.dec_widths.back(), 1, 1);
    m.params["dec.out.b"] = Tensor::zeros({cfg.chunk * cfg.channels});
    m.params["codebank"] = init_codebank(bank.size, bank.dim, rng);
    m.validate();
    return m;
}

size_t param_count(const BackboneConfig& cfg, const BankConfig& bank) {
    size_t n = 0;
    uint32_t in_ch = input_channels(cfg);
    for (uint32_t wdt : cfg.enc_widths) {
        n += static_cast<size_t>(wdt) * in_ch * 9 + wdt;
        in_ch = wdt;
    }
    n += static_cast<size_t>(cfg.token_dim()) * cfg.code_dim + cfg.code_dim;
    in_ch = cfg.code_dim;
    for (uint32_t wdt : cfg.dec_widths) {
        n += static_cast<size_t>(wdt) * in_ch * 9 + wdt;
        in_ch = wdt;
    }
    n += static_cast<size_t>(cfg.chunk) * cfg.channels * cfg.dec_widths.back() + cfg.chunk * cfg.channels;
    n += static_cast<size_t>(bank.size) * bank.dim;
    return n;
}

EncoderVars bind_encoder(ad::Graph& g, const ModelState& m, bool trainable) {
    EncoderVars ev;
    for (size_t i = 0; i < m.cfg.enc_widths.size(); ++i) {
        const std::string base = "enc.conv" + std::to_string(i);
        ev.convs.emplace_back(g.leaf(m.params.at(base + ".w"), trainable),
                              g.leaf(m.params.at(base + ".b"), trainable));
    }
    ev.proj_w = g.leaf(m.params.at("proj.w"), trainable);
    ev.proj_b = g.leaf(m.params.at("proj.b"), trainable);
    return ev;
}

DecoderVars bind_decoder(ad::Graph& g, const ModelState& m, bool trainable) {
    DecoderVars dv;
    for (size_t i = 0; i < m.cfg.dec_widths.size(); ++i) {
        const std::string base = "dec.conv" + std::to_string(i);
        dv.convs.emplace_back(g.leaf(m.params.at(base + ".w"), trainable),
                              g.leaf(m.params.at(base + ".b"), trainable));
    }
    dv.out_w = g.leaf(m.params.at("dec.out.w"), trainable);
    dv.out_b = g.leaf(m.params.at("dec.out.b"), trainable);
    return dv;
}

ad::Var run_encoder(ad::Graph& g, const BackboneConfig& cfg, const EncoderVars& ev, ad::Var window) {
    const Tensor& wv = g.value(window);
    if (wv.shape != Shape{cfg.t_in, cfg.channels, cfg.h, cfg.w})
        data_error("encode: window shape " + shape_str(wv.shape) + " does not match config (" +
                   shape_str({cfg.t_in, cfg.channels, cfg.h, cfg.w}) + ")");
    ad::Var x = g.reshape(window, {input_channels(cfg), cfg.h, cfg.w});
    for (const auto& [w, b] : ev.convs) x = g.relu(g.bias_chw(g.conv2d(x, w, 2, 1), b));
    ad::Var tokens = g.grid_to_tokens(x);  // (l, token_dim)
    ad::Var z = g.bias_cols(g.matmul(tokens, ev.proj_w), ev.proj_b);
    return cfg.sigmoid_tokens ? g.sigmoid(z) : z;
}

ad::Var run_decoder(ad::Graph& g, const BackboneConfig& cfg, const DecoderVars& dv, ad::Var tokens) {
    const Tensor& tv = g.value(tokens);
    if (tv.shape != Shape{cfg.tokens(), cfg.code_dim})
        data_error("decode: token shape " + shape_str(tv.shape) + " does not match config (" +
                   shape_str({cfg.tokens(), cfg.code_dim}) + ")");
    ad::Var x = g.tokens_to_grid(tokens, cfg.grid_h(), cfg.grid_w());
    for (const auto& [w, b] : dv.convs) x = g.relu(g.bias_chw(g.conv2d(g.upsample2x(x), w, 1, 1), b));
    x = g.bias_chw(g.conv2d(x, dv.out_w, 1, 0), dv.out_b);
    return g.reshape(x, {cfg.chunk, cfg.channels, cfg.h, cfg.w});
}

Tensor encode(const ModelState& m, const Tensor& window) {
    ad::Graph g;
    EncoderVars ev = bind_encoder(g, m, false);
    return g.value(run_encoder(g, m.cfg, ev, g.constant(window)));
}

Tensor decode(const ModelState& m, const Tensor& tokens) {
    m.decode_calls.n.fetch_add(1, std::memory_order_relaxed);
    ad::Graph g;
    DecoderVars dv = bind_decoder(g, m, false);
    return g.value(run_decoder(g, m.cfg, dv, g.constant(tokens)));
}

void save_model(const std::string& path, const ModelState& m, const NormTensors& norm) {
    m.validate();
    std::map<std::string, Tensor> tensors = m.params;
    tensors["norm.mean"] = norm.mean;
    tensors["norm.std"] = norm.std;
    save_checkpoint(path, tensors);
}

std::pair<ModelState, NormTensors> load_model(const std::string& path, const BackboneConfig& cfg,
                                              const BankConfig& bank) {
    std::map<std::string, Tensor> tensors = load_checkpoint(path);
    NormTensors norm;
    auto take = [&](const char* name, Tensor& dst) {
        auto it = tensors.find(name);
        if (it == tensors.end()) data_error("checkpoint missing tensor '" + std::string(name) + "'");
        dst = std::move(it->second);
        tensors.erase(it);
    };
    take("norm.mean", norm.mean);
    take("norm.std", norm.std);
    ModelState m;
    m.cfg = cfg;
    m.bank_cfg = bank;
    m.params = std::move(tensors);
    m.validate();
    return {std::move(m), std::move(norm)};
}

Tensor slide_window(const Tensor& window, const Tensor& frames) {
    if (window.shape.size() != 4 || frames.shape.size() != 4)
        data_error("slide_window: expected (T,C,H,W) tensors");
    const uint32_t t_in = window.shape[0], chunk = frames.shape[0];
    const size_t frame = window.numel() / t_in;
    if (frames.numel() / chunk != frame)
        data_error("slide_window: frame geometry mismatch " + shape_str(window.shape) + " vs " +
                   shape_str(frames.shape));
    Tensor out = window;
    if (chunk >= t_in) {
        std::copy_n(frames.data.data() + (static_cast<size_t>(chunk) - t_in) * frame,
                    static_cast<size_t>(t_in) * frame, out.data.data());
    } else {
        std::copy_n(window.data.data() + static_cast<size_t>(chunk) * frame,
                    (static_cast<size_t>(t_in) - chunk) * frame, out.data.data());
        std::copy_n(frames.data.data(), static_cast<size_t>(chunk) * frame,
                    out.data.data() + (static_cast<size_t>(t_in) - chunk) * frame);
    }
    return out;
}

}  // namespace bvq
