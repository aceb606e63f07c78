#pragma once

#include <cstdint>
#include <string>

namespace bvq::cli {

// Command bodies throw bvq::Error; the binary maps kinds onto exit codes
// (0 ok, 2 config, 3 data, 4 numeric).

struct GenDataArgs {
    std::string config;
    std::string out;
    uint64_t seed = 0;
    bool seed_set = false;
    bool force = false;
};
void gen_data(const GenDataArgs& args);

struct TrainArgs {
    std::string config;
    std::string data_dir;
    std::string out;
    bool force = false;
    int threads = 0;
};
void train(const TrainArgs& args);

struct PredictArgs {
    std::string checkpoint;
    std::string config;  // defaults to config.resolved.cfg next to the checkpoint
    std::string data;
    std::string out;
    uint32_t index = 0;
    uint32_t beam_k = 0;  // 0: from config
    uint32_t chunk = 0;   // 0: model chunk; anything else must match it
    bool trace = false;
    bool force = false;
    int threads = 0;
};
void predict(const PredictArgs& args);

struct EvalArgs {
    std::string checkpoint;
    std::string config;
    std::string data;
    std::string out;
    uint32_t beam_k = 0;  // 0: variant default (beam for beam variants, greedy otherwise)
    bool force = false;
    int threads = 0;
};
void eval(const EvalArgs& args);

struct AblateArgs {
    std::string config;
    std::string data_dir;
    std::string out;
    std::string variants = "full,no_beam,no_selftrain,mse_scorer";
    bool force = false;
    int threads = 0;
};
void ablate(const AblateArgs& args);

}  // namespace bvq::cli
