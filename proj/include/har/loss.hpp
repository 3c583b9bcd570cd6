#pragma once

#include <cstddef>
#include <vector>

#include "har/tensor.hpp"

namespace har::train {

// -sum y_i ln(p_i) with p floored at 1e-12 before the log. y must be one-hot.
double categorical_crossentropy(const Tensor& p, const Tensor& y);

// mean loss over a batch of (probabilities, one-hot) pairs
double mean_crossentropy(const std::vector<Tensor>& p, const std::vector<Tensor>& y);

// argmax with ties broken toward the lowest index
std::size_t argmax_lowest(const Tensor& v);

}  // namespace har::train
