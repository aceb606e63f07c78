#include "bvq/codebank.hpp"

#include <algorithm>
#include <cmath>

namespace bvq {

Tensor init_codebank(uint32_t l, uint32_t d, Rng& rng) {
    if (l < 1 || d < 1) data_error("init_codebank: L and D must be >= 1");
    const double bound = 1.0 / std::sqrt(static_cast<double>(d));
    Tensor bank({l, d});
    for (float& v : bank.data) v = static_cast<float>(rng.uniform(-bound, bound));
    return bank;
}

TopKResult topk_lookup(const Tensor& bank, const Tensor& z, uint32_t k) {
    if (bank.shape.size() != 2) data_error("topk_lookup: bank must be (L,D), got " + shape_str(bank.shape));
    const uint32_t L = bank.shape[0], D = bank.shape[1];
    if (k < 1) data_error("topk_lookup: K must be >= 1");
    if (k > L) data_error("topk_lookup: K=" + std::to_string(k) + " exceeds bank size L=" + std::to_string(L));

    Tensor zv = z;
    if (zv.shape.size() == 1) zv = zv.reshaped({1, zv.shape[0]});
    if (zv.shape.size() != 2 || zv.shape[1] != D)
        data_error("topk_lookup: query " + shape_str(z.shape) + " does not match code dim " + std::to_string(D));
    const uint32_t l = zv.shape[0];

    std::vector<double> code_norms(L, 0.0);
    for (uint32_t j = 0; j < L; ++j) {
        const float* row = bank.data.data() + static_cast<size_t>(j) * D;
        double acc = 0.0;
        for (uint32_t d = 0; d < D; ++d) acc += static_cast<double>(row[d]) * row[d];
        code_norms[j] = acc;
    }

    TopKResult res;
    res.tokens = l;
    res.k = k;
    res.indices.resize(static_cast<size_t>(l) * k);
    res.dists.resize(static_cast<size_t>(l) * k);

    std::vector<std::pair<double, uint32_t>> cand(L);
    for (uint32_t t = 0; t < l; ++t) {
        const float* q = zv.data.data() + static_cast<size_t>(t) * D;
        double qn = 0.0;
        for (uint32_t d = 0; d < D; ++d) qn += static_cast<double>(q[d]) * q[d];
        for (uint32_t j = 0; j < L; ++j) {
            const float* row = bank.data.data() + static_cast<size_t>(j) * D;
            double dot = 0.0;
            for (uint32_t d = 0; d < D; ++d) dot += static_cast<double>(q[d]) * row[d];
            cand[j] = {qn - 2.0 * dot + code_norms[j], j};
        }
        std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
        // exact recompute on the selected set, then final order
        for (uint32_t r = 0; r < k; ++r) {
            const uint32_t j = cand[r].second;
            const float* row = bank.data.data() + static_cast<size_t>(j) * D;
            double acc = 0.0;
            for (uint32_t d = 0; d < D; ++d) {
                const double diff = static_cast<double>(q[d]) - row[d];
                acc += diff * diff;
            }
            cand[r].first = acc;
        }
        std::sort(cand.begin(), cand.begin() + k);
        for (uint32_t r = 0; r < k; ++r) {
            res.indices[static_cast<size_t>(t) * k + r] = cand[r].second;
            res.dists[static_cast<size_t>(t) * k + r] = cand[r].first;
        }
    }
    return res;
}

std::pair<std::vector<uint32_t>, Tensor> quantize_nearest(const Tensor& bank, const Tensor& z) {
    TopKResult res = topk_lookup(bank, z, 1);
    return {res.indices, codes_at_rank(bank, res, 0)};
}

Tensor codes_at_rank(const Tensor& bank, const TopKResult& res, uint32_t rank) {
    if (rank >= res.k) data_error("codes_at_rank: rank out of range");
    const uint32_t D = bank.shape[1];
    Tensor out({res.tokens, D});
    for (uint32_t t = 0; t < res.tokens; ++t) {
        const uint32_t j = res.index_at(t, rank);
        std::copy_n(bank.data.data() + static_cast<size_t>(j) * D, D,
                    out.data.data() + static_cast<size_t>(t) * D);
    }
    return out;
}

std::vector<uint32_t> indices_at_rank(const TopKResult& res, uint32_t rank) {
    if (rank >= res.k) data_error("indices_at_rank: rank out of range");
    std::vector<uint32_t> out(res.tokens);
    for (uint32_t t = 0; t < res.tokens; ++t) out[t] = res.index_at(t, rank);
    return out;
}

VqLossTerms vq_loss_terms(ad::Graph& g, ad::Var zprime, ad::Var codes) {
    VqLossTerms terms;
    terms.commitment_term = g.sum_squares(g.sub(zprime, g.stop_gradient(codes)));
    terms.codebook_term = g.sum_squares(g.sub(g.stop_gradient(zprime), codes));
    return terms;
}

}  // namespace bvq
