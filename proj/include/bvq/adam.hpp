#pragma once

#include <map>
#include <string>

#include "bvq/tensor.hpp"

namespace bvq {

// Per-parameter first/second moments plus a shared step counter. Moments are
// created on first use and must shape-match their parameter afterwards.
struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int64_t step = 0;
    std::map<std::string, Tensor> m;
    std::map<std::string, Tensor> v;
};

// One bias-corrected Adam update over all named parameters. Gradients must
// cover every parameter; a non-finite gradient aborts with a diagnostic
// naming the parameter.
void adam_step(std::map<std::string, Tensor>& params,
               const std::map<std::string, Tensor>& grads, AdamState& state);

}  // namespace bvq
