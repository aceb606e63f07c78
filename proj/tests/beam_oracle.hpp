#pragma once

// Brute-force beam-search reference shared by the unit and acceptance suites.
// Every path is re-decoded from scratch (no incremental state), then pruned
// level by level under the production ordering and tie rules.

#include <algorithm>
#include <vector>

#include "bvq/beam.hpp"
#include "bvq/codebank.hpp"

namespace beam_oracle {

inline bvq::Tensor replay_frames(const bvq::ModelState& m, const bvq::Tensor& input,
                                 const std::vector<uint32_t>& ranks) {
    bvq::Tensor window = input;
    bvq::Tensor frames;
    for (uint32_t r : ranks) {
        const bvq::Tensor z = bvq::encode(m, window);
        bvq::TopKResult lk = bvq::topk_lookup(m.bank(), z, r);
        const bvq::Tensor chunk = bvq::decode(m, bvq::codes_at_rank(m.bank(), lk, r - 1));
        if (frames.numel() == 0) {
            frames = chunk;
        } else {
            bvq::Shape s = frames.shape;
            s[0] += chunk.shape[0];
            bvq::Tensor merged(std::move(s));
            std::copy(frames.data.begin(), frames.data.end(), merged.data.begin());
            std::copy(chunk.data.begin(), chunk.data.end(), merged.data.begin() + frames.numel());
            frames = std::move(merged);
        }
        window = bvq::slide_window(window, chunk);
    }
    return frames;
}

struct Node {
    std::vector<uint32_t> ranks;
    double score = 0.0;
    uint32_t parent = 0;
};

inline std::vector<std::vector<Node>> enumerate(const bvq::ModelState& m, const bvq::Tensor& input,
                                                uint32_t k, uint32_t depth, const bvq::ScoreFn& score) {
    const uint32_t L = m.bank().shape[0];
    std::vector<std::vector<Node>> levels;
    std::vector<Node> retained{{{}, 0.0, 0}};
    for (uint32_t d = 0; d < depth; ++d) {
        const uint32_t fanout = d == 0 ? std::min(k * k, L) : std::min(k, L);
        std::vector<Node> children;
        for (uint32_t pi = 0; pi < retained.size(); ++pi)
            for (uint32_t r = 1; r <= fanout; ++r) {
                Node c;
                c.ranks = retained[pi].ranks;
                c.ranks.push_back(r);
                c.score = score(replay_frames(m, input, c.ranks));
                c.parent = pi;
                children.push_back(std::move(c));
            }
        std::stable_sort(children.begin(), children.end(), [](const Node& a, const Node& b) {
            if (a.score != b.score) return a.score > b.score;
            if (a.parent != b.parent) return a.parent < b.parent;
            return a.ranks.back() < b.ranks.back();
        });
        if (children.size() > k) children.resize(k);
        retained = children;
        levels.push_back(retained);
    }
    return levels;
}

}  // namespace beam_oracle
