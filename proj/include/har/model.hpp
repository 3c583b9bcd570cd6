#pragma once

#include <array>
#include <string>
#include <vector>

#include "har/layers.hpp"
#include "har/params.hpp"
#include "har/rng.hpp"
#include "har/tensor.hpp"

namespace har::nn {

// Executable model: owns the parameters plus all forward caches needed for
// backprop. Buffers are allocated once in the constructor and reused across
// samples, so a fit loop never allocates. One instance is single-threaded;
// distinct instances are independent.
class Model {
  public:
    Model(ModelSpec spec, ParameterBundle params);

    // Glorot-initialized instance
    static Model init(const ModelSpec& spec, Rng& rng);

    const ModelSpec& spec() const { return spec_; }
    const ParameterBundle& params() const { return params_; }
    ParameterBundle& params() { return params_; }
    void set_params(ParameterBundle params);

    // Forward one window (input_steps x input_channels). Returns the class
    // probability vector. Dropout fires only when training, drawing from rng.
    const Tensor& forward(const Tensor& x, bool training, Rng* rng = nullptr);

    // Accumulate d(cross-entropy)/d(params) for the last forward into grads
    // (layout must match params). target is one-hot over num_classes; the
    // output layer uses the fused softmax + cross-entropy gradient p - y.
    void backward(const Tensor& target, ParameterBundle& grads);

  private:
    struct LayerState {
        LayerSpec spec;
        std::string label;
        DataShape in_shape, out_shape;
        int param_base = -1;  // first tensor index in the bundle, -1 if none
        Tensor out;           // post-activation output
        Tensor out_grad;      // dLoss/d(out)
        Tensor hseq;          // recurrent: all hidden states when out is last-only
        Tensor gates;         // lstm: L x 4u post-nonlinearity; gru: L x 3u (z,r,cand)
        Tensor cell;          // lstm: L x u cell states
        Tensor cell_tanh;     // lstm: L x u tanh(cell)
        Tensor rec_pre;       // gru: L x u candidate recurrent pre-product
        std::vector<std::size_t> argmax;  // pool layers
        std::vector<double> mask;         // dropout multipliers (0 or 1/(1-rate))
        std::vector<double> scratch;      // per-step work space
    };

    const Tensor& layer_input(std::size_t i) const;
    const Tensor& hidden_seq(const LayerState& l) const;

    void forward_layer(std::size_t i, const Tensor& x, bool training, Rng* rng);
    void backward_layer(std::size_t i, const Tensor& x, ParameterBundle& grads, bool want_input_grad);

    ModelSpec spec_;
    ParameterBundle params_;
    std::vector<LayerState> layers_;
    Tensor input_;       // copy of the last forward input
    std::vector<double> scratch_prev_grad_;  // input-gradient hand-off between layers
    bool forward_done_ = false;
    bool training_mode_ = false;
};

// Spec-level convenience wrappers (allocate a fresh runtime per call).
Tensor model_forward(const ModelSpec& spec, const ParameterBundle& params, const Tensor& x,
                     bool training, Rng* rng = nullptr);
ParameterBundle model_backward(const ModelSpec& spec, const ParameterBundle& params, const Tensor& x,
                               const Tensor& target, Rng* rng = nullptr, bool training = true);

// exactly one 1.0 and zeros elsewhere
bool is_one_hot(const Tensor& t);

}  // namespace har::nn
