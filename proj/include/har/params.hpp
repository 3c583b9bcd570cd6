#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "har/layers.hpp"
#include "har/rng.hpp"
#include "har/tensor.hpp"

namespace har::nn {

struct NamedTensor {
    std::string name;
    Tensor value;

    bool operator==(const NamedTensor&) const = default;
};

// All trainable tensors of a model, ordered by layer. Layout per layer kind:
//   dense:      W [in x out], b [out]
//   conv1d:     W [Cout x k x Cin], b [Cout]
//   simple_rnn: W [Cin x u], U [u x u], b [u]
//   lstm:       W [Cin x 4u], U [u x 4u], b [4u]        gate order (i,f,g,o)
//   gru:        W [Cin x 3u], U [u x 3u], b_in [3u], b_rec [3u]   gate order (z,r,h)
struct ParameterBundle {
    std::vector<NamedTensor> tensors;

    std::size_t scalar_count() const {
        std::size_t n = 0;
        for (const auto& t : tensors) n += t.value.size();
        return n;
    }

    void fill(double value) {
        for (auto& t : tensors) t.value.fill(value);
    }

    bool same_layout(const ParameterBundle& other) const {
        if (tensors.size() != other.tensors.size()) return false;
        for (std::size_t i = 0; i < tensors.size(); ++i) {
            if (tensors[i].name != other.tensors[i].name) return false;
            if (tensors[i].value.shape() != other.tensors[i].value.shape()) return false;
        }
        return true;
    }

    bool operator==(const ParameterBundle&) const = default;
};

// Trainable-parameter count from the layer formulas alone:
//   dense in*out + out; simple_rnn u(in+u+1); lstm 4u(in+u+1);
//   gru 3u(in+u+2); conv1d Cout(k*Cin+1); everything else 0.
std::size_t param_count(const ModelSpec& spec);

// Per-layer counts in layer order (zeros included), same formulas.
std::vector<std::size_t> param_count_per_layer(const ModelSpec& spec);

// Allocate a zeroed bundle matching the spec.
ParameterBundle allocate_params(const ModelSpec& spec);

// Glorot/Xavier uniform for weight matrices and kernels (limit
// sqrt(6/(fan_in+fan_out)) from the tensor's matrix shape), zeros for biases.
ParameterBundle init_params(const ModelSpec& spec, Rng& rng);

}  // namespace har::nn
