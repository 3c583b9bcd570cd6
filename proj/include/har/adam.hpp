#pragma once

#include <cstdint>
#include <string>

#include "har/params.hpp"

namespace har::train {

// Adam first/second-moment accumulators; shapes mirror the parameters.
struct AdamState {
    nn::ParameterBundle m;
    nn::ParameterBundle v;
    std::uint64_t t = 0;

    static AdamState init(const nn::ModelSpec& spec);
};

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// One Adam update on mean-batch gradients:
//   t += 1;  m = b1*m + (1-b1)*g;  v = b2*v + (1-b2)*g^2
//   params -= lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
// A non-finite gradient aborts with a TrainError naming the tensor plus
// `context` (callers add the epoch).
void adam_step(nn::ParameterBundle& params, const nn::ParameterBundle& grads, AdamState& state,
               const AdamConfig& cfg, const std::string& context = "");

}  // namespace har::train
