#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "har/rng.hpp"
#include "har/tensor.hpp"

namespace har::nn {

enum class LayerKind {
    Flatten,
    Dense,
    SimpleRnn,
    Lstm,
    Gru,
    Conv1d,
    MaxPool1d,
    GlobalMaxPool1d,
    Dropout,
};

enum class Activation { None, Relu, Tanh, Softmax };

const char* layer_kind_name(LayerKind kind);
const char* activation_name(Activation act);
LayerKind layer_kind_from_name(const std::string& name);
Activation activation_from_name(const std::string& name);

// Declarative description of one layer. Which fields matter depends on kind:
// units (dense width / recurrent units / conv filters), kernel (conv),
// pool (pool layers), return_sequences (recurrent), dropout_rate (dropout).
struct LayerSpec {
    LayerKind kind = LayerKind::Flatten;
    std::size_t units = 0;
    std::size_t kernel = 0;
    std::size_t pool = 0;
    Activation activation = Activation::None;
    bool return_sequences = false;
    double dropout_rate = 0.0;

    static LayerSpec flatten() { return {LayerKind::Flatten}; }
    static LayerSpec dense(std::size_t units, Activation act) {
        LayerSpec s{LayerKind::Dense};
        s.units = units;
        s.activation = act;
        return s;
    }
    static LayerSpec simple_rnn(std::size_t units, Activation act, bool return_sequences) {
        LayerSpec s{LayerKind::SimpleRnn};
        s.units = units;
        s.activation = act;
        s.return_sequences = return_sequences;
        return s;
    }
    static LayerSpec lstm(std::size_t units, bool return_sequences) {
        LayerSpec s{LayerKind::Lstm};
        s.units = units;
        s.activation = Activation::Tanh;
        s.return_sequences = return_sequences;
        return s;
    }
    static LayerSpec gru(std::size_t units, bool return_sequences) {
        LayerSpec s{LayerKind::Gru};
        s.units = units;
        s.activation = Activation::Tanh;
        s.return_sequences = return_sequences;
        return s;
    }
    static LayerSpec conv1d(std::size_t filters, std::size_t kernel, Activation act) {
        LayerSpec s{LayerKind::Conv1d};
        s.units = filters;
        s.kernel = kernel;
        s.activation = act;
        return s;
    }
    static LayerSpec maxpool1d(std::size_t pool) {
        LayerSpec s{LayerKind::MaxPool1d};
        s.pool = pool;
        return s;
    }
    static LayerSpec global_maxpool1d() { return {LayerKind::GlobalMaxPool1d}; }
    static LayerSpec dropout(double rate) {
        LayerSpec s{LayerKind::Dropout};
        s.dropout_rate = rate;
        return s;
    }

    bool operator==(const LayerSpec&) const = default;
};

// Architecture description: input is a steps x channels window, output a
// num_classes probability vector.
struct ModelSpec {
    std::string name;
    std::size_t input_steps = 200;
    std::size_t input_channels = 6;
    std::vector<LayerSpec> layers;
    std::size_t num_classes = 4;

    bool operator==(const ModelSpec&) const = default;
};

// Shape flowing between layers: either a steps x channels sequence or a flat
// vector of `channels` values.
struct DataShape {
    std::size_t steps = 0;
    std::size_t channels = 0;
    bool sequence = false;

    static DataShape seq(std::size_t steps, std::size_t channels) { return {steps, channels, true}; }
    static DataShape vec(std::size_t n) { return {0, n, false}; }

    std::size_t count() const { return sequence ? steps * channels : channels; }
    std::string str() const;
    bool operator==(const DataShape&) const = default;
};

// Output shape of one layer; throws ShapeError naming `where` on mismatch.
DataShape propagate_shape(const LayerSpec& layer, const DataShape& in, const std::string& where);

// Validates the whole stack (softmax placement, dropout rates, shape flow);
// returns the final output shape.
DataShape validate_spec(const ModelSpec& spec);

// Canonical single-line text encoding of a spec; hashed into weight files.
std::string canonical_encoding(const ModelSpec& spec);
std::uint64_t spec_fingerprint(const ModelSpec& spec);

// ---- activations -----------------------------------------------------------

void apply_activation(double* p, std::size_t n, Activation act);
// derivative expressed from the activation output (valid for none/relu/tanh)
double activation_grad_from_output(double y, Activation act);

// numerically stable softmax, max-shifted
void softmax_inplace(double* z, std::size_t n);
Tensor softmax(const Tensor& z);

// ---- layer forward passes ---------------------------------------------------
// Pure functions over explicit weights; the Model runtime composes the same
// math with caching for backprop.

// x: [in] or [batch x in]; W: [in x out]; b: [out]
Tensor dense_forward(const Tensor& x, const Tensor& W, const Tensor& b, Activation act);

// x: [L x Cin]; W: [Cout x k x Cin]; b: [Cout]; valid padding, stride 1
Tensor conv1d_forward(const Tensor& x, const Tensor& W, const Tensor& b, Activation act);

// non-overlapping max over pool-sized blocks, trailing remainder dropped
Tensor maxpool1d_forward(const Tensor& x, std::size_t pool);

// max over the whole time axis, per channel
Tensor global_maxpool1d_forward(const Tensor& x);

// h_t = act(x_t W + h_{t-1} U + b), h_0 = 0
// x: [L x Cin]; W: [Cin x u]; U: [u x u]; b: [u]
Tensor simple_rnn_forward(const Tensor& x, const Tensor& W, const Tensor& U, const Tensor& b,
                          Activation act, bool return_sequences);

// gate order (i, f, g, o); i,f,o logistic sigmoid, g and output squash tanh
// x: [L x Cin]; W: [Cin x 4u]; U: [u x 4u]; b: [4u]
Tensor lstm_forward(const Tensor& x, const Tensor& W, const Tensor& U, const Tensor& b,
                    bool return_sequences);

// double-bias GRU, gate order (z, r, h):
//   z = sigmoid(x W_z + b_in_z + h_prev U_z + b_rec_z)
//   r = sigmoid(x W_r + b_in_r + h_prev U_r + b_rec_r)
//   hcand = tanh(x W_h + b_in_h + r * (h_prev U_h + b_rec_h))
//   h = z * h_prev + (1 - z) * hcand
// x: [L x Cin]; W: [Cin x 3u]; U: [u x 3u]; b_in, b_rec: [3u]
Tensor gru_forward(const Tensor& x, const Tensor& W, const Tensor& U, const Tensor& b_in,
                   const Tensor& b_rec, bool return_sequences);

// inverted dropout: zero with probability rate, survivors scaled by 1/(1-rate)
Tensor dropout_apply(const Tensor& x, double rate, Rng& rng, bool training);

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace har::nn
