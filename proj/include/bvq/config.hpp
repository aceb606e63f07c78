#pragma once

#include <string>
#include <vector>

#include "bvq/backbone.hpp"
#include "bvq/dataset.hpp"
#include "bvq/metrics.hpp"
#include "bvq/selftrain.hpp"

namespace bvq {

// Experiment variants, all reachable from config alone:
//   full         - beam search + physics filtering + self-training
//   no_beam      - beam width forced to 1, filtering retained
//   no_selftrain - beam inference only, no pool growth
//   mse_scorer   - candidates filtered by MSE against the model's own greedy
//                  rollout instead of a physics score
//   vq_plain     - plain quantized forecaster (nearest code, no self-training)
//   baseline     - quantization bypassed: the raw deterministic backbone
enum class Variant { Full, NoBeam, NoSelfTrain, MseScorer, VqPlain, Baseline };

Variant variant_from_string(const std::string& s);
std::string variant_to_string(Variant v);
bool variant_uses_beam_eval(Variant v);

// How a variant rewires the training loop relative to the configured values.
struct VariantWiring {
    bool bypass_quantization = false;
    bool self_training = true;
    bool scorer_greedy_reference = false;
    bool beam_eval = true;         // beam search at evaluation/prediction time
    bool force_beam_width_1 = false;  // train-time generation runs greedy
};
VariantWiring variant_wiring(Variant v);

// Flat typed key-value configuration with [data]/[model]/[bank]/[beam]/[train]
// sections. Unknown sections or keys are rejected before any work happens.
struct ExperimentConfig {
    struct Data {
        uint32_t grid = 64;
        uint32_t steps = 305;
        uint32_t trajectories = 2;
        uint32_t t_in = 5;
        uint32_t t_out = 20;
        uint32_t stride = 1;
        double cfl = 0.3;
        double gravity = 9.81;
        double dx = 1.0;
        double dy = 1.0;
        double train_frac = 0.7;
        double val_frac = 0.15;
        uint64_t seed = 7;
    } data;

    struct Model {
        std::vector<uint32_t> enc_widths = {12, 24, 32};
        std::vector<uint32_t> dec_widths = {24, 12, 8};
        uint32_t chunk = 10;
        bool sigmoid_tokens = true;
    } model;

    struct Bank {
        uint32_t size = 1024;
        uint32_t dim = 64;
    } bank;

    struct Beam {
        uint32_t k = 5;
        std::string scorer = "neg_divergence";
        double w_div = 1.0;
        double w_spec = 0.0;
    } beam;

    struct Train {
        double lr = 1e-3;
        uint32_t batch = 100;
        uint32_t epochs = 500;
        uint32_t e1 = 100;
        uint32_t e2 = 200;
        uint32_t mid_freq = 50;
        uint32_t late_freq = 10;
        double lambda = 1.0;
        double beta = 0.25;
        double gamma = 1.0;
        std::string threshold = "quartile";  // or "constant"
        double threshold_value = 0.0;
        uint32_t max_gen_inputs = 16;
        uint32_t patience = 200;
        uint32_t val_every = 5;
        std::string variant = "full";
        uint64_t seed = 1;
    } train;

    void validate() const;
    std::string canonical_text() const;  // deterministic dump, reparseable
    std::string config_hash() const;     // hex fnv-1a of the canonical text

    BackboneConfig backbone(uint32_t channels) const;
    BankConfig bank_config() const;
    TrainSchedule schedule() const;
    LossWeights loss_weights() const;
    Variant variant() const { return variant_from_string(train.variant); }
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);
void save_config(const std::string& path, const ExperimentConfig& cfg);

}  // namespace bvq
