#include "bvq/adam.hpp"

#include <cmath>

namespace bvq {

void adam_step(std::map<std::string, Tensor>& params,
               const std::map<std::string, Tensor>& grads, AdamState& state) {
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (auto& [name, p] : params) {
        auto git = grads.find(name);
        if (git == grads.end()) data_error("adam_step: missing gradient for parameter '" + name + "'");
        const Tensor& g = git->second;
        require_same_shape(p, g, "adam_step");

        Tensor& m = state.m.try_emplace(name, Tensor::zeros(p.shape)).first->second;
        Tensor& v = state.v.try_emplace(name, Tensor::zeros(p.shape)).first->second;
        require_same_shape(p, m, "adam_step moment");

        const float b1 = static_cast<float>(state.beta1);
        const float b2 = static_cast<float>(state.beta2);
        for (size_t i = 0; i < p.numel(); ++i) {
            const float gi = g.data[i];
            if (!std::isfinite(gi))
                numeric_error("adam_step: non-finite gradient in parameter '" + name + "' at index " +
                              std::to_string(i));
            m.data[i] = b1 * m.data[i] + (1.0f - b1) * gi;
            v.data[i] = b2 * v.data[i] + (1.0f - b2) * gi * gi;
            const double mhat = static_cast<double>(m.data[i]) / bc1;
            const double vhat = static_cast<double>(v.data[i]) / bc2;
            p.data[i] = static_cast<float>(static_cast<double>(p.data[i]) -
                                           state.lr * mhat / (std::sqrt(vhat) + state.eps));
        }
    }
}

}  // namespace bvq
