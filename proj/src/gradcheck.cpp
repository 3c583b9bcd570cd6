#include "har/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "har/error.hpp"
#include "har/model.hpp"

namespace har::nn {

namespace {

double cross_entropy(const Tensor& probs, const Tensor& target) {
    double loss = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (target[i] != 0.0) loss -= target[i] * std::log(std::max(probs[i], 1e-300));
    }
    return loss;
}

}  // namespace

GradientCheckReport finite_diff_compare(const ModelSpec& spec, const ParameterBundle& params,
                                        const Tensor& x, const Tensor& target,
                                        const ParameterBundle& analytic, double tolerance,
                                        double step) {
    if (!analytic.same_layout(params)) {
        throw ShapeError("gradient check: analytic gradient layout does not match the parameters");
    }
    Model model(spec, params);

    GradientCheckReport report;
    report.step = step;
    report.tolerance = tolerance;
    report.pass = true;
    for (std::size_t t = 0; t < model.params().tensors.size(); ++t) {
        Tensor& value = model.params().tensors[t].value;
        const Tensor& ga = analytic.tensors[t].value;
        double worst = 0.0;
        for (std::size_t i = 0; i < value.size(); ++i) {
            double saved = value[i];
            value[i] = saved + step;
            double above = cross_entropy(model.forward(x, false), target);
            value[i] = saved - step;
            double below = cross_entropy(model.forward(x, false), target);
            value[i] = saved;
            double gn = (above - below) / (2.0 * step);
            double rel = std::abs(ga[i] - gn) / std::max({std::abs(ga[i]), std::abs(gn), 1e-12});
            worst = std::max(worst, rel);
        }
        report.tensors.push_back({analytic.tensors[t].name, worst});
        if (!(worst < tolerance)) report.pass = false;
    }
    return report;
}

GradientCheckReport gradient_check(const ModelSpec& spec, const ParameterBundle& params,
                                   const Tensor& x, const Tensor& target, double tolerance,
                                   double step) {
    Model model(spec, params);
    model.forward(x, false);
    ParameterBundle grads = allocate_params(spec);
    model.backward(target, grads);
    return finite_diff_compare(spec, params, x, target, grads, tolerance, step);
}

}  // namespace har::nn
