#pragma once

#include <atomic>
#include <map>
#include <string>
#include <vector>

#include "bvq/graph.hpp"
#include "bvq/rng.hpp"

namespace bvq {

// Geometry of the convolutional encoder-decoder. The encoder is a stack of
// stride-2 3x3 conv+relu blocks (one per entry of enc_widths, the last entry
// being the token width), followed by an affine projection into the code
// dimension with a bounded activation. The decoder mirrors it with
// upsample2x+conv blocks and a linear 1x1 head emitting `chunk` frames.
struct BackboneConfig {
    uint32_t t_in = 5;
    uint32_t channels = 3;
    uint32_t h = 64;
    uint32_t w = 64;
    std::vector<uint32_t> enc_widths = {12, 24, 32};
    std::vector<uint32_t> dec_widths = {24, 12, 8};
    uint32_t code_dim = 64;
    uint32_t chunk = 10;  // decoder output frames per step
    bool sigmoid_tokens = true;
    bool bypass_quantization = false;  // ablation hook: plain deterministic forecaster

    uint32_t downsample() const { return 1u << enc_widths.size(); }
    uint32_t grid_h() const { return h / downsample(); }
    uint32_t grid_w() const { return w / downsample(); }
    uint32_t tokens() const { return grid_h() * grid_w(); }
    uint32_t token_dim() const { return enc_widths.back(); }
    void validate() const;
};

struct BankConfig {
    uint32_t size = 1024;  // L
    uint32_t dim = 64;     // D
};

// Copyable call counter; beam-search tests instrument decode costs through it.
struct CallCounter {
    std::atomic<uint64_t> n{0};
    CallCounter() = default;
    CallCounter(const CallCounter& o) : n(o.n.load()) {}
    CallCounter& operator=(const CallCounter& o) {
        n.store(o.n.load());
        return *this;
    }
};

struct ModelState {
    BackboneConfig cfg;
    BankConfig bank_cfg;
    std::map<std::string, Tensor> params;  // includes "codebank"
    int64_t epoch = 0;
    mutable CallCounter decode_calls;

    const Tensor& bank() const { return params.at("codebank"); }
    void validate() const;
};

ModelState init_model(const BackboneConfig& cfg, const BankConfig& bank, uint64_t seed);
size_t param_count(const BackboneConfig& cfg, const BankConfig& bank);

// Graph-level forward pieces, shared by training and inference.
struct EncoderVars {
    std::vector<std::pair<ad::Var, ad::Var>> convs;  // (weight, bias)
    ad::Var proj_w, proj_b;
};
struct DecoderVars {
    std::vector<std::pair<ad::Var, ad::Var>> convs;
    ad::Var out_w, out_b;
};

EncoderVars bind_encoder(ad::Graph& g, const ModelState& m, bool trainable);
DecoderVars bind_decoder(ad::Graph& g, const ModelState& m, bool trainable);

// window (T_in,C,H,W) -> tokens (l,D)
ad::Var run_encoder(ad::Graph& g, const BackboneConfig& cfg, const EncoderVars& ev, ad::Var window);
// tokens (l,D) -> frames (chunk,C,H,W)
ad::Var run_decoder(ad::Graph& g, const BackboneConfig& cfg, const DecoderVars& dv, ad::Var tokens);

// Gradient-free convenience paths; decode() bumps the instrumented counter.
Tensor encode(const ModelState& m, const Tensor& window);
Tensor decode(const ModelState& m, const Tensor& tokens);

// Window update for autoregressive rollouts: drop the oldest `chunk` frames,
// append the predicted ones (pure data movement).
Tensor slide_window(const Tensor& window, const Tensor& frames);

// Checkpoint glue: model parameters plus the training normalization stats
// ("norm.mean"/"norm.std") in one "BVQP" file.
struct NormTensors {
    Tensor mean;  // (C,)
    Tensor std;   // (C,)
};
void save_model(const std::string& path, const ModelState& m, const NormTensors& norm);
std::pair<ModelState, NormTensors> load_model(const std::string& path, const BackboneConfig& cfg,
                                              const BankConfig& bank);

}  // namespace bvq
