#pragma once

#include <utility>
#include <vector>

#include "bvq/graph.hpp"
#include "bvq/rng.hpp"
#include "bvq/tensor.hpp"

namespace bvq {

// The code bank is an (L,D) tensor named "codebank" among the model
// parameters. Lookups are read-only; updates happen only through optimizer
// steps on the codebook loss term.

Tensor init_codebank(uint32_t l, uint32_t d, Rng& rng);  // uniform in [-1/sqrt(D), 1/sqrt(D)]

// Top-K nearest codes per token by squared Euclidean distance, ties broken by
// lower code index. Distances are accumulated in f64 with the
// |z|^2 - 2 z.e + |e|^2 expansion, then recomputed exactly for the selected
// set to kill cancellation artifacts before the final ordering.
struct TopKResult {
    uint32_t tokens = 0;
    uint32_t k = 0;
    std::vector<uint32_t> indices;  // [token*k + rank]
    std::vector<double> dists;      // matching squared distances

    uint32_t index_at(uint32_t token, uint32_t rank) const { return indices[token * k + rank]; }
    double dist_at(uint32_t token, uint32_t rank) const { return dists[token * k + rank]; }
};

TopKResult topk_lookup(const Tensor& bank, const Tensor& z, uint32_t k);  // z: (l,D) or (D,)

// K=1 shorthand: per-token nearest code index and the gathered codes.
std::pair<std::vector<uint32_t>, Tensor> quantize_nearest(const Tensor& bank, const Tensor& z);

// Codes of one rank across all tokens, as an (l,D) tensor.
Tensor codes_at_rank(const Tensor& bank, const TopKResult& res, uint32_t rank);
std::vector<uint32_t> indices_at_rank(const TopKResult& res, uint32_t rank);

// VQ regularizers with stop-gradient placement:
//   commitment = |z' - sg(e)|^2   (moves the encoder toward its codes)
//   codebook   = |sg(z') - e|^2   (moves the codes toward encoder outputs)
struct VqLossTerms {
    ad::Var codebook_term;
    ad::Var commitment_term;
};
VqLossTerms vq_loss_terms(ad::Graph& g, ad::Var zprime, ad::Var codes);

}  // namespace bvq
