#pragma once

#include <string>
#include <vector>

#include "har/layers.hpp"
#include "har/params.hpp"
#include "har/tensor.hpp"

namespace har::nn {

// Outcome of comparing an analytic gradient against central finite
// differences of the cross-entropy loss, one row per parameter tensor.
struct GradientCheckReport {
    struct TensorResult {
        std::string name;
        double max_rel_error = 0.0;
    };

    std::vector<TensorResult> tensors;
    double step = 0.0;
    double tolerance = 0.0;
    bool pass = false;  // every tensor's max relative error < tolerance

    double max_rel_error() const {
        double worst = 0.0;
        for (const auto& t : tensors) worst = std::max(worst, t.max_rel_error);
        return worst;
    }
};

// Compare a caller-supplied analytic gradient against central differences
// (loss measured in eval mode, so dropout is inert). Relative error per
// parameter is |g_a - g_n| / max(|g_a|, |g_n|, 1e-12).
GradientCheckReport finite_diff_compare(const ModelSpec& spec, const ParameterBundle& params,
                                        const Tensor& x, const Tensor& target,
                                        const ParameterBundle& analytic, double tolerance = 1e-6,
                                        double step = 1e-5);

// Full check: run the model's own backward pass and compare every parameter
// against central finite differences.
GradientCheckReport gradient_check(const ModelSpec& spec, const ParameterBundle& params,
                                   const Tensor& x, const Tensor& target, double tolerance = 1e-6,
                                   double step = 1e-5);

}  // namespace har::nn
