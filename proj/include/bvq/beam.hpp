#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "bvq/backbone.hpp"

namespace bvq {

// Candidate scoring callback. Receives all frames decoded so far for one
// candidate, in model (normalized) space, shape (t,C,H,W); higher is better.
using ScoreFn = std::function<double(const Tensor&)>;

// One node of the search: the rank choices taken so far (1-based), the frames
// they decoded to, and the sliding input window they leave behind.
struct BeamCandidate {
    std::vector<uint32_t> rank_path;
    Tensor frames;  // (depth*chunk, C, H, W)
    Tensor window;  // (T_in, C, H, W)
    double score = -std::numeric_limits<double>::infinity();
    uint32_t parent = 0;  // index in the previous retained set
};

struct BeamConfig {
    uint32_t k = 5;        // beam width
    uint32_t horizon = 20; // T': frames to produce
    int threads = 1;
    bool record_trace = false;

    void validate(const BackboneConfig& model_cfg) const;
};

struct BeamTraceEntry {
    uint32_t depth = 0;
    std::vector<double> scores;          // retained candidates, best first
    std::vector<uint32_t> chosen_ranks;  // last rank of each retained candidate
    std::vector<uint32_t> parents;
    std::string to_json_line() const;
};

struct BeamResult {
    BeamCandidate best;
    std::vector<BeamCandidate> finals;  // retained set after the last level, sorted
    std::vector<BeamTraceEntry> trace;
};

// Expands every active candidate with its top-K code substitutions (rank r
// swaps in each token's rank-r code), decodes and scores each child on its
// full sequence so far, and keeps the K best. Children are ordered by
// (score desc, parent asc, rank asc); the tie rule makes runs reproducible.
std::vector<BeamCandidate> beam_step(const std::vector<BeamCandidate>& active, const ModelState& model,
                                     uint32_t k, const ScoreFn& score, int threads = 1);

// Full rollout of horizon/chunk levels from one input window. The root level
// fans out over ranks 1..min(K^2, L) so that every level evaluates exactly
// K^2 candidate states (the steady-state beam cost); afterwards each level is
// a plain beam_step. Returns the argmax-score final candidate plus the whole
// retained set for self-training filters.
BeamResult beam_forecast(const Tensor& window, const ModelState& model, const BeamConfig& cfg,
                         const ScoreFn& score);

// Deterministic nearest-code rollout (the K=1 pipeline).
Tensor greedy_forecast(const ModelState& model, const Tensor& window, uint32_t horizon);

// Cost model: decoding n frames in chunks of c with beam width K computes
// (n/c) * K^2 candidate states. Errors unless c divides n.
uint64_t count_states(uint64_t n, uint64_t k, uint64_t c);

}  // namespace bvq
