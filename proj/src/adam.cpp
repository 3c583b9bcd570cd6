#include "har/adam.hpp"

#include <cmath>

#include "har/error.hpp"

namespace har::train {

AdamState AdamState::init(const nn::ModelSpec& spec) {
    AdamState state;
    state.m = nn::allocate_params(spec);
    state.v = nn::allocate_params(spec);
    state.t = 0;
    return state;
}

void adam_step(nn::ParameterBundle& params, const nn::ParameterBundle& grads, AdamState& state,
               const AdamConfig& cfg, const std::string& context) {
    if (!grads.same_layout(params) || !state.m.same_layout(params)) {
        throw ShapeError("adam_step: gradient/state layout does not match the parameters");
    }
    state.t += 1;
    double mc = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    double vc = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    for (std::size_t k = 0; k < params.tensors.size(); ++k) {
        double* theta = params.tensors[k].value.data();
        const double* g = grads.tensors[k].value.data();
        double* m = state.m.tensors[k].value.data();
        double* v = state.v.tensors[k].value.data();
        std::size_t n = params.tensors[k].value.size();
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isfinite(g[i])) {
                throw TrainError("non-finite gradient in '" + params.tensors[k].name + "'" + context);
            }
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            theta[i] -= cfg.learning_rate * (m[i] / mc) / (std::sqrt(v[i] / vc) + cfg.epsilon);
        }
    }
}

}  // namespace har::train
