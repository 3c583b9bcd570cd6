#include "har/params.hpp"

#include <cmath>

#include "har/error.hpp"

namespace har::nn {

namespace {

struct LayerDims {
    // input width seen by the layer (channels for seq layers, flat size for dense)
    std::size_t in = 0;
    LayerSpec layer;
};

// walks the spec and records the input width of every layer
std::vector<LayerDims> layer_dims(const ModelSpec& spec) {
    validate_spec(spec);
    std::vector<LayerDims> dims;
    DataShape shape = DataShape::seq(spec.input_steps, spec.input_channels);
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& layer = spec.layers[i];
        dims.push_back({shape.channels, layer});
        shape = propagate_shape(layer, shape, "layer " + std::to_string(i));
    }
    return dims;
}

void glorot_fill(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-limit, limit);
}

}  // namespace

std::vector<std::size_t> param_count_per_layer(const ModelSpec& spec) {
    std::vector<std::size_t> counts;
    for (const LayerDims& d : layer_dims(spec)) {
        std::size_t in = d.in, u = d.layer.units;
        switch (d.layer.kind) {
            case LayerKind::Dense: counts.push_back(in * u + u); break;
            case LayerKind::SimpleRnn: counts.push_back(u * (in + u + 1)); break;
            case LayerKind::Lstm: counts.push_back(4 * u * (in + u + 1)); break;
            case LayerKind::Gru: counts.push_back(3 * u * (in + u + 2)); break;
            case LayerKind::Conv1d: counts.push_back(u * (d.layer.kernel * in + 1)); break;
            default: counts.push_back(0); break;
        }
    }
    return counts;
}

std::size_t param_count(const ModelSpec& spec) {
    std::size_t total = 0;
    for (std::size_t c : param_count_per_layer(spec)) total += c;
    return total;
}

ParameterBundle allocate_params(const ModelSpec& spec) {
    ParameterBundle bundle;
    std::size_t index = 0;
    for (const LayerDims& d : layer_dims(spec)) {
        std::size_t in = d.in, u = d.layer.units;
        std::string prefix = "layer" + std::to_string(index) + "." + layer_kind_name(d.layer.kind);
        switch (d.layer.kind) {
            case LayerKind::Dense:
                bundle.tensors.push_back({prefix + ".W", Tensor({in, u})});
                bundle.tensors.push_back({prefix + ".b", Tensor({u})});
                break;
            case LayerKind::SimpleRnn:
                bundle.tensors.push_back({prefix + ".W", Tensor({in, u})});
                bundle.tensors.push_back({prefix + ".U", Tensor({u, u})});
                bundle.tensors.push_back({prefix + ".b", Tensor({u})});
                break;
            case LayerKind::Lstm:
                bundle.tensors.push_back({prefix + ".W", Tensor({in, 4 * u})});
                bundle.tensors.push_back({prefix + ".U", Tensor({u, 4 * u})});
                bundle.tensors.push_back({prefix + ".b", Tensor({4 * u})});
                break;
            case LayerKind::Gru:
                bundle.tensors.push_back({prefix + ".W", Tensor({in, 3 * u})});
                bundle.tensors.push_back({prefix + ".U", Tensor({u, 3 * u})});
                bundle.tensors.push_back({prefix + ".b_in", Tensor({3 * u})});
                bundle.tensors.push_back({prefix + ".b_rec", Tensor({3 * u})});
                break;
            case LayerKind::Conv1d:
                bundle.tensors.push_back({prefix + ".W", Tensor({u, d.layer.kernel, in})});
                bundle.tensors.push_back({prefix + ".b", Tensor({u})});
                break;
            default:
                break;
        }
        ++index;
    }
    return bundle;
}

ParameterBundle init_params(const ModelSpec& spec, Rng& rng) {
    ParameterBundle bundle = allocate_params(spec);
    for (auto& nt : bundle.tensors) {
        const Tensor& t = nt.value;
        bool is_bias = t.rank() == 1;
        if (is_bias) continue;  // biases stay zero
        if (t.rank() == 2) {
            glorot_fill(nt.value, t.dim(0), t.dim(1), rng);
        } else {
            // conv kernel [Cout x k x Cin]: fan_in k*Cin, fan_out k*Cout
            glorot_fill(nt.value, t.dim(1) * t.dim(2), t.dim(1) * t.dim(0), rng);
        }
    }
    return bundle;
}

}  // namespace har::nn
