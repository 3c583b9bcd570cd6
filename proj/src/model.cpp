#include "har/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "har/error.hpp"
#include "har/linalg.hpp"

namespace har::nn {

namespace {

Tensor shape_tensor(const DataShape& s) {
    if (s.sequence) return Tensor({s.steps, s.channels});
    return Tensor({s.channels});
}

}  // namespace

bool is_one_hot(const Tensor& t) {
    std::size_t ones = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] == 1.0) {
            ++ones;
        } else if (t[i] != 0.0) {
            return false;
        }
    }
    return ones == 1;
}

Model::Model(ModelSpec spec, ParameterBundle params) : spec_(std::move(spec)), params_(std::move(params)) {
    validate_spec(spec_);
    ParameterBundle expected = allocate_params(spec_);
    if (!params_.same_layout(expected)) {
        throw ShapeError("model '" + spec_.name + "': parameter bundle does not match the spec (" +
                         std::to_string(params_.scalar_count()) + " scalars given, " +
                         std::to_string(expected.scalar_count()) + " expected)");
    }

    DataShape shape = DataShape::seq(spec_.input_steps, spec_.input_channels);
    input_ = Tensor({spec_.input_steps, spec_.input_channels});
    std::size_t tensor_index = 0;
    for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
        LayerState st;
        st.spec = spec_.layers[i];
        st.label = "layer " + std::to_string(i) + " (" + layer_kind_name(st.spec.kind) + ")";
        st.in_shape = shape;
        st.out_shape = propagate_shape(st.spec, shape, st.label);
        st.out = shape_tensor(st.out_shape);
        st.out_grad = shape_tensor(st.out_shape);

        std::size_t L = st.in_shape.steps, u = st.spec.units;
        switch (st.spec.kind) {
            case LayerKind::Dense:
                st.param_base = static_cast<int>(tensor_index);
                tensor_index += 2;
                st.scratch.assign(u, 0.0);
                break;
            case LayerKind::Conv1d:
                st.param_base = static_cast<int>(tensor_index);
                tensor_index += 2;
                break;
            case LayerKind::SimpleRnn:
                st.param_base = static_cast<int>(tensor_index);
                tensor_index += 3;
                if (!st.spec.return_sequences) st.hseq = Tensor({L, u});
                st.scratch.assign(3 * u, 0.0);
                break;
            case LayerKind::Lstm:
                st.param_base = static_cast<int>(tensor_index);
                tensor_index += 3;
                if (!st.spec.return_sequences) st.hseq = Tensor({L, u});
                st.gates = Tensor({L, 4 * u});
                st.cell = Tensor({L, u});
                st.cell_tanh = Tensor({L, u});
                st.scratch.assign(8 * u, 0.0);
                break;
            case LayerKind::Gru:
                st.param_base = static_cast<int>(tensor_index);
                tensor_index += 4;
                if (!st.spec.return_sequences) st.hseq = Tensor({L, u});
                st.gates = Tensor({L, 3 * u});
                st.rec_pre = Tensor({L, u});
                st.scratch.assign(9 * u, 0.0);
                break;
            case LayerKind::MaxPool1d:
            case LayerKind::GlobalMaxPool1d:
                st.argmax.assign(st.out_shape.count(), 0);
                break;
            case LayerKind::Dropout:
                st.mask.assign(st.out_shape.count(), 1.0);
                break;
            case LayerKind::Flatten:
                break;
        }
        layers_.push_back(std::move(st));
        shape = layers_.back().out_shape;
    }
}

Model Model::init(const ModelSpec& spec, Rng& rng) {
    ParameterBundle params = init_params(spec, rng);
    return Model(spec, std::move(params));
}

void Model::set_params(ParameterBundle params) {
    if (!params.same_layout(params_)) {
        throw ShapeError("model '" + spec_.name + "': replacement parameters do not match the spec");
    }
    params_ = std::move(params);
}

const Tensor& Model::layer_input(std::size_t i) const {
    return i == 0 ? input_ : layers_[i - 1].out;
}

const Tensor& Model::hidden_seq(const LayerState& l) const {
    return l.spec.return_sequences ? l.out : l.hseq;
}

const Tensor& Model::forward(const Tensor& x, bool training, Rng* rng) {
    if (x.shape() != input_.shape()) {
        throw ShapeError("model '" + spec_.name + "': input " + Tensor::shape_string(x.shape()) +
                         " does not match expected " + Tensor::shape_string(input_.shape()));
    }
    std::copy(x.flat().begin(), x.flat().end(), input_.flat().begin());
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        forward_layer(i, layer_input(i), training, rng);
    }
    forward_done_ = true;
    training_mode_ = training;
    return layers_.back().out;
}

void Model::forward_layer(std::size_t i, const Tensor& x, bool training, Rng* rng) {
    LayerState& l = layers_[i];
    const LayerSpec& ls = l.spec;
    switch (ls.kind) {
        case LayerKind::Flatten: {
            std::copy(x.flat().begin(), x.flat().end(), l.out.flat().begin());
            return;
        }
        case LayerKind::Dense: {
            const Tensor& W = params_.tensors[l.param_base].value;
            const Tensor& b = params_.tensors[l.param_base + 1].value;
            std::size_t in = W.dim(0), out = W.dim(1);
            double* y = l.out.data();
            std::copy(b.data(), b.data() + out, y);
            add_vec_mat(x.data(), W.data(), in, out, y);
            apply_activation(y, out, ls.activation);
            return;
        }
        case LayerKind::Conv1d: {
            const Tensor& W = params_.tensors[l.param_base].value;
            const Tensor& b = params_.tensors[l.param_base + 1].value;
            std::size_t cout = W.dim(0), k = W.dim(1), cin = W.dim(2);
            std::size_t lout = l.out_shape.steps;
            std::size_t span = k * cin;
            for (std::size_t t = 0; t < lout; ++t) {
                const double* window = x.data() + t * cin;
                double* y = l.out.data() + t * cout;
                for (std::size_t o = 0; o < cout; ++o) {
                    y[o] = b[o] + dot(W.data() + o * span, window, span);
                }
                apply_activation(y, cout, ls.activation);
            }
            return;
        }
        case LayerKind::MaxPool1d: {
            std::size_t channels = l.in_shape.channels, pool = ls.pool;
            std::size_t lout = l.out_shape.steps;
            for (std::size_t m = 0; m < lout; ++m) {
                for (std::size_t c = 0; c < channels; ++c) {
                    std::size_t best = m * pool;
                    double bv = x(best, c);
                    for (std::size_t j = 1; j < pool; ++j) {
                        double v = x(m * pool + j, c);
                        if (v > bv) {
                            bv = v;
                            best = m * pool + j;
                        }
                    }
                    l.out(m, c) = bv;
                    l.argmax[m * channels + c] = best;
                }
            }
            return;
        }
        case LayerKind::GlobalMaxPool1d: {
            std::size_t channels = l.in_shape.channels, steps = l.in_shape.steps;
            for (std::size_t c = 0; c < channels; ++c) {
                std::size_t best = 0;
                double bv = x(0, c);
                for (std::size_t t = 1; t < steps; ++t) {
                    if (x(t, c) > bv) {
                        bv = x(t, c);
                        best = t;
                    }
                }
                l.out[c] = bv;
                l.argmax[c] = best;
            }
            return;
        }
        case LayerKind::Dropout: {
            std::size_t n = l.out.size();
            const double* src = x.data();
            double* dst = l.out.data();
            if (!training || ls.dropout_rate == 0.0) {
                std::fill(l.mask.begin(), l.mask.end(), 1.0);
                std::copy(src, src + n, dst);
                return;
            }
            if (rng == nullptr) {
                throw TrainError(l.label + ": training-mode forward needs a dropout rng");
            }
            double scale = 1.0 / (1.0 - ls.dropout_rate);
            for (std::size_t j = 0; j < n; ++j) {
                double m = rng->uniform() < ls.dropout_rate ? 0.0 : scale;
                l.mask[j] = m;
                dst[j] = src[j] * m;
            }
            return;
        }
        case LayerKind::SimpleRnn: {
            const Tensor& W = params_.tensors[l.param_base].value;
            const Tensor& U = params_.tensors[l.param_base + 1].value;
            const Tensor& b = params_.tensors[l.param_base + 2].value;
            std::size_t L = l.in_shape.steps, cin = l.in_shape.channels, u = ls.units;
            Tensor& hs = ls.return_sequences ? l.out : l.hseq;
            const double* hprev = nullptr;
            for (std::size_t t = 0; t < L; ++t) {
                double* h = hs.data() + t * u;
                std::copy(b.data(), b.data() + u, h);
                add_vec_mat(x.data() + t * cin, W.data(), cin, u, h);
                if (t > 0) add_vec_mat(hprev, U.data(), u, u, h);
                apply_activation(h, u, ls.activation);
                hprev = h;
            }
            if (!ls.return_sequences) std::copy(hprev, hprev + u, l.out.data());
            return;
        }
        case LayerKind::Lstm: {
            const Tensor& W = params_.tensors[l.param_base].value;
            const Tensor& U = params_.tensors[l.param_base + 1].value;
            const Tensor& b = params_.tensors[l.param_base + 2].value;
            std::size_t L = l.in_shape.steps, cin = l.in_shape.channels, u = ls.units;
            Tensor& hs = ls.return_sequences ? l.out : l.hseq;
            const double* hprev = nullptr;
            for (std::size_t t = 0; t < L; ++t) {
                double* g = l.gates.data() + t * 4 * u;
                std::copy(b.data(), b.data() + 4 * u, g);
                add_vec_mat(x.data() + t * cin, W.data(), cin, 4 * u, g);
                if (t > 0) add_vec_mat(hprev, U.data(), u, 4 * u, g);
                double* c = l.cell.data() + t * u;
                const double* cprev = t > 0 ? l.cell.data() + (t - 1) * u : nullptr;
                double* tc = l.cell_tanh.data() + t * u;
                double* h = hs.data() + t * u;
                for (std::size_t j = 0; j < u; ++j) {
                    double ig = sigmoid(g[j]);
                    double fg = sigmoid(g[u + j]);
                    double gg = std::tanh(g[2 * u + j]);
                    double og = sigmoid(g[3 * u + j]);
                    g[j] = ig;
                    g[u + j] = fg;
                    g[2 * u + j] = gg;
                    g[3 * u + j] = og;
                    c[j] = (cprev ? fg * cprev[j] : 0.0) + ig * gg;
                    tc[j] = std::tanh(c[j]);
                    h[j] = og * tc[j];
                }
                hprev = h;
            }
            if (!ls.return_sequences) std::copy(hprev, hprev + u, l.out.data());
            return;
        }
        case LayerKind::Gru: {
            const Tensor& W = params_.tensors[l.param_base].value;
            const Tensor& U = params_.tensors[l.param_base + 1].value;
            const Tensor& b_in = params_.tensors[l.param_base + 2].value;
            const Tensor& b_rec = params_.tensors[l.param_base + 3].value;
            std::size_t L = l.in_shape.steps, cin = l.in_shape.channels, u = ls.units;
            Tensor& hs = ls.return_sequences ? l.out : l.hseq;
            double* a_in = l.scratch.data();
            double* a_rec = l.scratch.data() + 3 * u;
            const double* hprev = nullptr;
            for (std::size_t t = 0; t < L; ++t) {
                std::copy(b_in.data(), b_in.data() + 3 * u, a_in);
                add_vec_mat(x.data() + t * cin, W.data(), cin, 3 * u, a_in);
                std::copy(b_rec.data(), b_rec.data() + 3 * u, a_rec);
                if (t > 0) add_vec_mat(hprev, U.data(), u, 3 * u, a_rec);
                double* g = l.gates.data() + t * 3 * u;
                double* s = l.rec_pre.data() + t * u;
                double* h = hs.data() + t * u;
                for (std::size_t j = 0; j < u; ++j) {
                    double zg = sigmoid(a_in[j] + a_rec[j]);
                    double rg = sigmoid(a_in[u + j] + a_rec[u + j]);
                    double srec = a_rec[2 * u + j];
                    double cand = std::tanh(a_in[2 * u + j] + rg * srec);
                    g[j] = zg;
                    g[u + j] = rg;
                    g[2 * u + j] = cand;
                    s[j] = srec;
                    h[j] = zg * (hprev ? hprev[j] : 0.0) + (1.0 - zg) * cand;
                }
                hprev = h;
            }
            if (!ls.return_sequences) std::copy(hprev, hprev + u, l.out.data());
            return;
        }
    }
}

void Model::backward(const Tensor& target, ParameterBundle& grads) {
    if (!forward_done_) {
        throw TrainError("model '" + spec_.name + "': backward without a preceding forward");
    }
    if (target.size() != spec_.num_classes || !is_one_hot(target)) {
        throw TrainError("model '" + spec_.name + "': target must be one-hot over " +
                         std::to_string(spec_.num_classes) + " classes");
    }
    if (!grads.same_layout(params_)) {
        throw ShapeError("model '" + spec_.name + "': gradient bundle layout mismatch");
    }

    // fused softmax + cross-entropy gradient at the output logits
    LayerState& last = layers_.back();
    for (std::size_t j = 0; j < spec_.num_classes; ++j) {
        last.out_grad[j] = last.out[j] - target[j];
    }

    for (std::size_t i = layers_.size(); i-- > 0;) {
        backward_layer(i, layer_input(i), grads, i > 0);
        if (i > 0) {
            // hand the input gradient to the previous layer
            std::swap(layers_[i - 1].out_grad.flat(), scratch_prev_grad_);
        }
    }
}

void Model::backward_layer(std::size_t i, const Tensor& x, ParameterBundle& grads, bool want_input_grad) {
    LayerState& l = layers_[i];
    const LayerSpec& ls = l.spec;
    scratch_prev_grad_.assign(x.size(), 0.0);
    double* gx = scratch_prev_grad_.data();
    const double* gy = l.out_grad.data();

    switch (ls.kind) {
        case LayerKind::Flatten: {
            if (want_input_grad) std::copy(gy, gy + l.out.size(), gx);
            return;
        }
        case LayerKind::Dense: {
            const Tensor& W = params_.tensors[l.param_base].value;
            Tensor& dW = grads.tensors[l.param_base].value;
            Tensor& db = grads.tensors[l.param_base + 1].value;
            std::size_t in = W.dim(0), out = W.dim(1);
            double* gz = l.scratch.data();
            if (ls.activation == Activation::Softmax) {
                // out_grad already holds p - y
                std::copy(gy, gy + out, gz);
            } else {
                for (std::size_t j = 0; j < out; ++j) {
                    gz[j] = gy[j] * activation_grad_from_output(l.out[j], ls.activation);
                }
            }
            add_outer(x.data(), gz, dW.data(), in, out);
            axpy(1.0, gz, db.data(), out);
            if (want_input_grad) add_mat_vec_t(gz, W.data(), in, out, gx);
            return;
        }
        case LayerKind::Conv1d: {
            const Tensor& W = params_.tensors[l.param_base].value;
            Tensor& dW = grads.tensors[l.param_base].value;
            Tensor& db = grads.tensors[l.param_base + 1].value;
            std::size_t cout = W.dim(0), k = W.dim(1), cin = W.dim(2);
            std::size_t lout = l.out_shape.steps;
            std::size_t span = k * cin;
            for (std::size_t t = 0; t < lout; ++t) {
                const double* window = x.data() + t * cin;
                double* gxw = gx + t * cin;
                const double* y = l.out.data() + t * cout;
                const double* g = gy + t * cout;
                for (std::size_t o = 0; o < cout; ++o) {
                    double gz = g[o] * activation_grad_from_output(y[o], ls.activation);
                    if (gz == 0.0) continue;
                    axpy(gz, window, dW.data() + o * span, span);
                    db[o] += gz;
                    if (want_input_grad) axpy(gz, W.data() + o * span, gxw, span);
                }
            }
            return;
        }
        case LayerKind::MaxPool1d: {
            if (!want_input_grad) return;
            std::size_t channels = l.in_shape.channels;
            std::size_t lout = l.out_shape.steps;
            for (std::size_t m = 0; m < lout; ++m) {
                for (std::size_t c = 0; c < channels; ++c) {
                    gx[l.argmax[m * channels + c] * channels + c] += gy[m * channels + c];
                }
            }
            return;
        }
        case LayerKind::GlobalMaxPool1d: {
            if (!want_input_grad) return;
            std::size_t channels = l.in_shape.channels;
            for (std::size_t c = 0; c < channels; ++c) {
                gx[l.argmax[c] * channels + c] += gy[c];
            }
            return;
        }
        case LayerKind::Dropout: {
            if (!want_input_grad) return;
            for (std::size_t j = 0; j < l.out.size(); ++j) gx[j] = gy[j] * l.mask[j];
            return;
        }
        case LayerKind::SimpleRnn: {
            const Tensor& W = params_.tensors[l.param_base].value;
            const Tensor& U = params_.tensors[l.param_base + 1].value;
            Tensor& dW = grads.tensors[l.param_base].value;
            Tensor& dU = grads.tensors[l.param_base + 1].value;
            Tensor& db = grads.tensors[l.param_base + 2].value;
            std::size_t L = l.in_shape.steps, cin = l.in_shape.channels, u = ls.units;
            const Tensor& hs = hidden_seq(l);
            double* dh_acc = l.scratch.data();
            double* gz = l.scratch.data() + u;
            double* dh_next = l.scratch.data() + 2 * u;
            std::fill(dh_acc, dh_acc + u, 0.0);
            for (std::size_t t = L; t-- > 0;) {
                const double* h = hs.data() + t * u;
                for (std::size_t j = 0; j < u; ++j) {
                    double up = ls.return_sequences ? gy[t * u + j] : (t + 1 == L ? gy[j] : 0.0);
                    gz[j] = (up + dh_acc[j]) * activation_grad_from_output(h[j], ls.activation);
                }
                add_outer(x.data() + t * cin, gz, dW.data(), cin, u);
                if (t > 0) add_outer(hs.data() + (t - 1) * u, gz, dU.data(), u, u);
                axpy(1.0, gz, db.data(), u);
                if (t > 0) {
                    std::fill(dh_next, dh_next + u, 0.0);
                    add_mat_vec_t(gz, U.data(), u, u, dh_next);
                    std::copy(dh_next, dh_next + u, dh_acc);
                }
                if (want_input_grad) add_mat_vec_t(gz, W.data(), cin, u, gx + t * cin);
            }
            return;
        }
        case LayerKind::Lstm: {
            const Tensor& W = params_.tensors[l.param_base].value;
            const Tensor& U = params_.tensors[l.param_base + 1].value;
            Tensor& dW = grads.tensors[l.param_base].value;
            Tensor& dU = grads.tensors[l.param_base + 1].value;
            Tensor& db = grads.tensors[l.param_base + 2].value;
            std::size_t L = l.in_shape.steps, cin = l.in_shape.channels, u = ls.units;
            const Tensor& hs = hidden_seq(l);
            double* dh_acc = l.scratch.data();
            double* dc_acc = l.scratch.data() + u;
            double* dz4 = l.scratch.data() + 2 * u;
            double* dh_next = l.scratch.data() + 6 * u;
            std::fill(dh_acc, dh_acc + u, 0.0);
            std::fill(dc_acc, dc_acc + u, 0.0);
            for (std::size_t t = L; t-- > 0;) {
                const double* g = l.gates.data() + t * 4 * u;
                const double* cprev = t > 0 ? l.cell.data() + (t - 1) * u : nullptr;
                const double* tc = l.cell_tanh.data() + t * u;
                for (std::size_t j = 0; j < u; ++j) {
                    double up = ls.return_sequences ? gy[t * u + j] : (t + 1 == L ? gy[j] : 0.0);
                    double dh = up + dh_acc[j];
                    double ig = g[j], fg = g[u + j], gg = g[2 * u + j], og = g[3 * u + j];
                    double dov = dh * tc[j];
                    double dc = dc_acc[j] + dh * og * (1.0 - tc[j] * tc[j]);
                    double di = dc * gg;
                    double df = cprev ? dc * cprev[j] : 0.0;
                    double dg = dc * ig;
                    dz4[j] = di * ig * (1.0 - ig);
                    dz4[u + j] = df * fg * (1.0 - fg);
                    dz4[2 * u + j] = dg * (1.0 - gg * gg);
                    dz4[3 * u + j] = dov * og * (1.0 - og);
                    dc_acc[j] = dc * fg;
                }
                add_outer(x.data() + t * cin, dz4, dW.data(), cin, 4 * u);
                if (t > 0) add_outer(hs.data() + (t - 1) * u, dz4, dU.data(), u, 4 * u);
                axpy(1.0, dz4, db.data(), 4 * u);
                if (t > 0) {
                    std::fill(dh_next, dh_next + u, 0.0);
                    add_mat_vec_t(dz4, U.data(), u, 4 * u, dh_next);
                    std::copy(dh_next, dh_next + u, dh_acc);
                }
                if (want_input_grad) add_mat_vec_t(dz4, W.data(), cin, 4 * u, gx + t * cin);
            }
            return;
        }
        case LayerKind::Gru: {
            const Tensor& W = params_.tensors[l.param_base].value;
            const Tensor& U = params_.tensors[l.param_base + 1].value;
            Tensor& dW = grads.tensors[l.param_base].value;
            Tensor& dU = grads.tensors[l.param_base + 1].value;
            Tensor& db_in = grads.tensors[l.param_base + 2].value;
            Tensor& db_rec = grads.tensors[l.param_base + 3].value;
            std::size_t L = l.in_shape.steps, cin = l.in_shape.channels, u = ls.units;
            const Tensor& hs = hidden_seq(l);
            double* dh_acc = l.scratch.data();
            double* din3 = l.scratch.data() + u;      // grads at a_in  (z, r, h blocks)
            double* drec3 = l.scratch.data() + 4 * u; // grads at a_rec (z, r, h blocks)
            double* dh_next = l.scratch.data() + 7 * u;
            std::fill(dh_acc, dh_acc + u, 0.0);
            for (std::size_t t = L; t-- > 0;) {
                const double* g = l.gates.data() + t * 3 * u;
                const double* s = l.rec_pre.data() + t * u;
                const double* hprev = t > 0 ? hs.data() + (t - 1) * u : nullptr;
                for (std::size_t j = 0; j < u; ++j) {
                    double up = ls.return_sequences ? gy[t * u + j] : (t + 1 == L ? gy[j] : 0.0);
                    double dh = up + dh_acc[j];
                    double zg = g[j], rg = g[u + j], cand = g[2 * u + j];
                    double hp = hprev ? hprev[j] : 0.0;
                    double dz = dh * (hp - cand);
                    double dcand = dh * (1.0 - zg);
                    double da_h = dcand * (1.0 - cand * cand);
                    double dr = da_h * s[j];
                    double ds = da_h * rg;
                    double dzpre = dz * zg * (1.0 - zg);
                    double drpre = dr * rg * (1.0 - rg);
                    din3[j] = dzpre;
                    din3[u + j] = drpre;
                    din3[2 * u + j] = da_h;
                    drec3[j] = dzpre;
                    drec3[u + j] = drpre;
                    drec3[2 * u + j] = ds;
                    dh_next[j] = dh * zg;  // direct path into h_{t-1}
                }
                add_outer(x.data() + t * cin, din3, dW.data(), cin, 3 * u);
                axpy(1.0, din3, db_in.data(), 3 * u);
                axpy(1.0, drec3, db_rec.data(), 3 * u);
                if (t > 0) {
                    add_outer(hprev, drec3, dU.data(), u, 3 * u);
                    add_mat_vec_t(drec3, U.data(), u, 3 * u, dh_next);
                    std::copy(dh_next, dh_next + u, dh_acc);
                }
                if (want_input_grad) add_mat_vec_t(din3, W.data(), cin, 3 * u, gx + t * cin);
            }
            return;
        }
    }
}

Tensor model_forward(const ModelSpec& spec, const ParameterBundle& params, const Tensor& x,
                     bool training, Rng* rng) {
    Model model(spec, params);
    return model.forward(x, training, rng);
}

ParameterBundle model_backward(const ModelSpec& spec, const ParameterBundle& params, const Tensor& x,
                               const Tensor& target, Rng* rng, bool training) {
    Model model(spec, params);
    model.forward(x, training, rng);
    ParameterBundle grads = allocate_params(spec);
    model.backward(target, grads);
    return grads;
}

}  // namespace har::nn
