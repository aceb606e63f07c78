#include "bvq/beam.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bvq/codebank.hpp"
#include "bvq/parallel.hpp"

namespace bvq {

void BeamConfig::validate(const BackboneConfig& model_cfg) const {
    if (k < 1) config_error("beam: K must be >= 1");
    if (horizon < 1) config_error("beam: horizon must be >= 1");
    if (horizon % model_cfg.chunk != 0)
        config_error("beam: chunk " + std::to_string(model_cfg.chunk) + " does not divide horizon " +
                     std::to_string(horizon));
}

std::string BeamTraceEntry::to_json_line() const {
    std::ostringstream os;
    os.precision(12);
    os << "{\"depth\":" << depth << ",\"scores\":[";
    for (size_t i = 0; i < scores.size(); ++i) os << (i ? "," : "") << scores[i];
    os << "],\"ranks\":[";
    for (size_t i = 0; i < chosen_ranks.size(); ++i) os << (i ? "," : "") << chosen_ranks[i];
    os << "],\"parents\":[";
    for (size_t i = 0; i < parents.size(); ++i) os << (i ? "," : "") << parents[i];
    os << "]}";
    return os.str();
}

namespace {

Tensor append_frames(const Tensor& frames, const Tensor& chunk) {
    if (frames.numel() == 0) return chunk;
    Shape s = frames.shape;
    s[0] += chunk.shape[0];
    Tensor out(std::move(s));
    std::copy(frames.data.begin(), frames.data.end(), out.data.begin());
    std::copy(chunk.data.begin(), chunk.data.end(), out.data.begin() + frames.numel());
    return out;
}

// Expands each active candidate over `fanout` code ranks, decodes + scores
// every child, keeps the best `keep`. Shared by beam_step (fanout = K) and
// the root bootstrap of beam_forecast (fanout = min(K^2, L)).
std::vector<BeamCandidate> expand_level(const std::vector<BeamCandidate>& active, const ModelState& model,
                                        uint32_t fanout, uint32_t keep, const ScoreFn& score, int threads) {
    if (active.empty()) data_error("beam: active candidate set is empty");
    const Tensor& bank = model.bank();
    const uint32_t ranks = model.cfg.bypass_quantization ? 1u : std::min(fanout, bank.shape[0]);

    const size_t nchildren = active.size() * ranks;
    std::vector<BeamCandidate> children(nchildren);
    parallel_for(active.size(), threads, [&](size_t p) {
        const BeamCandidate& parent = active[p];
        const Tensor zprime = encode(model, parent.window);
        TopKResult lk;
        if (!model.cfg.bypass_quantization) lk = topk_lookup(bank, zprime, ranks);
        for (uint32_t r = 0; r < ranks; ++r) {
            const Tensor tokens = model.cfg.bypass_quantization ? zprime : codes_at_rank(bank, lk, r);
            const Tensor chunk = decode(model, tokens);
            BeamCandidate child;
            child.rank_path = parent.rank_path;
            child.rank_path.push_back(r + 1);
            child.frames = append_frames(parent.frames, chunk);
            child.window = slide_window(parent.window, chunk);
            child.parent = static_cast<uint32_t>(p);
            child.score = score(child.frames);
            children[p * ranks + r] = std::move(child);
        }
    });

    std::vector<size_t> order(nchildren);
    for (size_t i = 0; i < nchildren; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (children[a].score != children[b].score) return children[a].score > children[b].score;
        if (children[a].parent != children[b].parent) return children[a].parent < children[b].parent;
        return children[a].rank_path.back() < children[b].rank_path.back();
    });

    const size_t retained = std::min<size_t>(keep, nchildren);
    std::vector<BeamCandidate> out;
    out.reserve(retained);
    for (size_t i = 0; i < retained; ++i) out.push_back(std::move(children[order[i]]));
    return out;
}

}  // namespace

std::vector<BeamCandidate> beam_step(const std::vector<BeamCandidate>& active, const ModelState& model,
                                     uint32_t k, const ScoreFn& score, int threads) {
    if (k < 1) config_error("beam_step: K must be >= 1");
    if (active.size() > k) data_error("beam_step: active set larger than beam width");
    return expand_level(active, model, k, k, score, threads);
}

BeamResult beam_forecast(const Tensor& window, const ModelState& model, const BeamConfig& cfg,
                         const ScoreFn& score) {
    cfg.validate(model.cfg);
    const uint32_t steps = cfg.horizon / model.cfg.chunk;

    BeamCandidate root;
    root.window = window;
    root.frames = Tensor();
    std::vector<BeamCandidate> active{root};

    BeamResult result;
    for (uint32_t depth = 0; depth < steps; ++depth) {
        // One input window can only branch over code ranks, so the root level
        // widens its fan-out to K^2; every level then costs K^2 decoded
        // states and the total matches count_states exactly.
        const uint32_t fanout = depth == 0 ? cfg.k * cfg.k : cfg.k;
        active = expand_level(active, model, fanout, cfg.k, score, cfg.threads);
        if (cfg.record_trace) {
            BeamTraceEntry e;
            e.depth = depth + 1;
            for (const BeamCandidate& c : active) {
                e.scores.push_back(c.score);
                e.chosen_ranks.push_back(c.rank_path.back());
                e.parents.push_back(c.parent);
            }
            result.trace.push_back(std::move(e));
        }
    }

    result.best = active.front();  // retained set is sorted best-first
    result.finals = std::move(active);
    return result;
}

Tensor greedy_forecast(const ModelState& model, const Tensor& window, uint32_t horizon) {
    if (horizon % model.cfg.chunk != 0)
        config_error("greedy_forecast: chunk does not divide horizon");
    Tensor frames;
    Tensor cur = window;
    const uint32_t steps = horizon / model.cfg.chunk;
    for (uint32_t s = 0; s < steps; ++s) {
        const Tensor zprime = encode(model, cur);
        Tensor tokens;
        if (model.cfg.bypass_quantization)
            tokens = zprime;
        else
            tokens = quantize_nearest(model.bank(), zprime).second;
        const Tensor chunk = decode(model, tokens);
        frames = append_frames(frames, chunk);
        cur = slide_window(cur, chunk);
    }
    return frames;
}

uint64_t count_states(uint64_t n, uint64_t k, uint64_t c) {
    if (c == 0 || n % c != 0)
        config_error("count_states: chunk " + std::to_string(c) + " does not divide horizon " + std::to_string(n));
    return (n / c) * k * k;
}

}  // namespace bvq
