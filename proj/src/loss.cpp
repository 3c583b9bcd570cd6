#include "har/loss.hpp"

#include <algorithm>
#include <cmath>

#include "har/error.hpp"
#include "har/model.hpp"

namespace har::train {

double categorical_crossentropy(const Tensor& p, const Tensor& y) {
    if (!p.same_shape(y)) {
        throw TrainError("cross-entropy: prediction " + Tensor::shape_string(p.shape()) +
                         " vs target " + Tensor::shape_string(y.shape()));
    }
    if (!nn::is_one_hot(y)) throw TrainError("cross-entropy: target is not one-hot");
    double loss = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (y[i] != 0.0) loss -= y[i] * std::log(std::max(p[i], 1e-12));
    }
    return loss;
}

double mean_crossentropy(const std::vector<Tensor>& p, const std::vector<Tensor>& y) {
    if (p.empty() || p.size() != y.size()) {
        throw TrainError("cross-entropy: batch of " + std::to_string(p.size()) +
                         " predictions vs " + std::to_string(y.size()) + " targets");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) total += categorical_crossentropy(p[i], y[i]);
    return total / static_cast<double>(p.size());
}

std::size_t argmax_lowest(const Tensor& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

}  // namespace har::train
