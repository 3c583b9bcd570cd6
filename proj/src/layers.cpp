#include "har/layers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "har/error.hpp"
#include "har/linalg.hpp"

namespace har::nn {

const char* layer_kind_name(LayerKind kind) {
    switch (kind) {
        case LayerKind::Flatten: return "flatten";
        case LayerKind::Dense: return "dense";
        case LayerKind::SimpleRnn: return "simple_rnn";
        case LayerKind::Lstm: return "lstm";
        case LayerKind::Gru: return "gru";
        case LayerKind::Conv1d: return "conv1d";
        case LayerKind::MaxPool1d: return "maxpool1d";
        case LayerKind::GlobalMaxPool1d: return "global_maxpool1d";
        case LayerKind::Dropout: return "dropout";
    }
    return "?";
}

const char* activation_name(Activation act) {
    switch (act) {
        case Activation::None: return "none";
        case Activation::Relu: return "relu";
        case Activation::Tanh: return "tanh";
        case Activation::Softmax: return "softmax";
    }
    return "?";
}

LayerKind layer_kind_from_name(const std::string& name) {
    for (LayerKind k : {LayerKind::Flatten, LayerKind::Dense, LayerKind::SimpleRnn, LayerKind::Lstm,
                        LayerKind::Gru, LayerKind::Conv1d, LayerKind::MaxPool1d,
                        LayerKind::GlobalMaxPool1d, LayerKind::Dropout}) {
        if (name == layer_kind_name(k)) return k;
    }
    throw ConfigError("unknown layer kind: " + name);
}

Activation activation_from_name(const std::string& name) {
    for (Activation a : {Activation::None, Activation::Relu, Activation::Tanh, Activation::Softmax}) {
        if (name == activation_name(a)) return a;
    }
    throw ConfigError("unknown activation: " + name);
}

std::string DataShape::str() const {
    if (sequence) return "(" + std::to_string(steps) + "x" + std::to_string(channels) + ")";
    return "(" + std::to_string(channels) + ")";
}

DataShape propagate_shape(const LayerSpec& layer, const DataShape& in, const std::string& where) {
    switch (layer.kind) {
        case LayerKind::Flatten:
            if (!in.sequence) throw ShapeError(where + ": flatten expects a sequence input, got " + in.str());
            return DataShape::vec(in.steps * in.channels);
        case LayerKind::Dense:
            if (in.sequence) throw ShapeError(where + ": dense expects a flat input, got " + in.str());
            if (layer.units == 0) throw ShapeError(where + ": dense needs units > 0");
            return DataShape::vec(layer.units);
        case LayerKind::SimpleRnn:
        case LayerKind::Lstm:
        case LayerKind::Gru:
            if (!in.sequence) throw ShapeError(where + ": recurrent layer expects a sequence input, got " + in.str());
            if (layer.units == 0) throw ShapeError(where + ": recurrent layer needs units > 0");
            return layer.return_sequences ? DataShape::seq(in.steps, layer.units)
                                          : DataShape::vec(layer.units);
        case LayerKind::Conv1d:
            if (!in.sequence) throw ShapeError(where + ": conv1d expects a sequence input, got " + in.str());
            if (layer.units == 0 || layer.kernel == 0) throw ShapeError(where + ": conv1d needs filters and kernel > 0");
            if (in.steps < layer.kernel) {
                throw ShapeError(where + ": window of length " + std::to_string(in.steps) +
                                 " is shorter than kernel " + std::to_string(layer.kernel));
            }
            return DataShape::seq(in.steps - layer.kernel + 1, layer.units);
        case LayerKind::MaxPool1d:
            if (!in.sequence) throw ShapeError(where + ": maxpool1d expects a sequence input, got " + in.str());
            if (layer.pool == 0) throw ShapeError(where + ": pool must be >= 1");
            if (layer.pool > in.steps) {
                throw ShapeError(where + ": pool " + std::to_string(layer.pool) +
                                 " over length " + std::to_string(in.steps) + " gives an empty output");
            }
            return DataShape::seq(in.steps / layer.pool, in.channels);
        case LayerKind::GlobalMaxPool1d:
            if (!in.sequence) throw ShapeError(where + ": global_maxpool1d expects a sequence input, got " + in.str());
            if (in.steps == 0) throw ShapeError(where + ": global_maxpool1d over an empty sequence");
            return DataShape::vec(in.channels);
        case LayerKind::Dropout:
            if (layer.dropout_rate < 0.0 || layer.dropout_rate >= 1.0) {
                throw ShapeError(where + ": dropout rate must lie in [0,1), got " +
                                 std::to_string(layer.dropout_rate));
            }
            return in;
    }
    throw ShapeError(where + ": unknown layer kind");
}

DataShape validate_spec(const ModelSpec& spec) {
    if (spec.layers.empty()) throw ShapeError("model '" + spec.name + "' has no layers");
    DataShape shape = DataShape::seq(spec.input_steps, spec.input_channels);
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& layer = spec.layers[i];
        std::string where = "model '" + spec.name + "' layer " + std::to_string(i) + " (" +
                            layer_kind_name(layer.kind) + ")";
        bool last = i + 1 == spec.layers.size();
        if (layer.activation == Activation::Softmax && !(last && layer.kind == LayerKind::Dense)) {
            throw ShapeError(where + ": softmax is only allowed on the final dense layer");
        }
        shape = propagate_shape(layer, shape, where);
    }
    const LayerSpec& out = spec.layers.back();
    if (out.kind != LayerKind::Dense || out.activation != Activation::Softmax) {
        throw ShapeError("model '" + spec.name + "': final layer must be dense with softmax");
    }
    if (shape.sequence || shape.channels != spec.num_classes) {
        throw ShapeError("model '" + spec.name + "': output shape " + shape.str() + " does not match " +
                         std::to_string(spec.num_classes) + " classes");
    }
    return shape;
}

std::string canonical_encoding(const ModelSpec& spec) {
    std::string s = spec.name + "|" + std::to_string(spec.input_steps) + "x" +
                    std::to_string(spec.input_channels) + "|" + std::to_string(spec.num_classes);
    for (const LayerSpec& l : spec.layers) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "|%s,u=%zu,k=%zu,p=%zu,a=%s,rs=%d,dr=%.17g",
                      layer_kind_name(l.kind), l.units, l.kernel, l.pool,
                      activation_name(l.activation), l.return_sequences ? 1 : 0, l.dropout_rate);
        s += buf;
    }
    return s;
}

std::uint64_t spec_fingerprint(const ModelSpec& spec) { return fnv1a64(canonical_encoding(spec)); }

void apply_activation(double* p, std::size_t n, Activation act) {
    switch (act) {
        case Activation::None:
            return;
        case Activation::Relu:
            for (std::size_t i = 0; i < n; ++i) p[i] = p[i] > 0.0 ? p[i] : 0.0;
            return;
        case Activation::Tanh:
            for (std::size_t i = 0; i < n; ++i) p[i] = std::tanh(p[i]);
            return;
        case Activation::Softmax:
            softmax_inplace(p, n);
            return;
    }
}

double activation_grad_from_output(double y, Activation act) {
    switch (act) {
        case Activation::None: return 1.0;
        case Activation::Relu: return y > 0.0 ? 1.0 : 0.0;
        case Activation::Tanh: return 1.0 - y * y;
        case Activation::Softmax: break;
    }
    throw ShapeError("softmax derivative is handled by the fused cross-entropy path");
}

void softmax_inplace(double* z, std::size_t n) {
    double m = z[0];
    for (std::size_t i = 1; i < n; ++i) m = std::max(m, z[i]);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        z[i] = std::exp(z[i] - m);
        sum += z[i];
    }
    for (std::size_t i = 0; i < n; ++i) z[i] /= sum;
}

Tensor softmax(const Tensor& z) {
    Tensor out = z;
    softmax_inplace(out.data(), out.size());
    return out;
}

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw ShapeError(msg);
}

}  // namespace

Tensor dense_forward(const Tensor& x, const Tensor& W, const Tensor& b, Activation act) {
    require(W.rank() == 2, "dense: weight must be rank 2, got " + Tensor::shape_string(W.shape()));
    std::size_t in = W.dim(0), out = W.dim(1);
    require(b.rank() == 1 && b.dim(0) == out,
            "dense: bias shape " + Tensor::shape_string(b.shape()) + " does not match " +
                std::to_string(out) + " outputs");
    std::size_t batch;
    if (x.rank() == 1) {
        require(x.dim(0) == in, "dense: input of size " + std::to_string(x.dim(0)) +
                                    " does not match weight rows " + std::to_string(in));
        batch = 1;
    } else {
        require(x.rank() == 2 && x.dim(1) == in,
                "dense: input " + Tensor::shape_string(x.shape()) + " does not match weight rows " +
                    std::to_string(in));
        batch = x.dim(0);
    }
    Tensor y = x.rank() == 1 ? Tensor({out}) : Tensor({batch, out});
    for (std::size_t s = 0; s < batch; ++s) {
        double* yr = y.data() + s * out;
        const double* xr = x.data() + s * in;
        for (std::size_t j = 0; j < out; ++j) yr[j] = b[j];
        add_vec_mat(xr, W.data(), in, out, yr);
        apply_activation(yr, out, act);
    }
    return y;
}

Tensor conv1d_forward(const Tensor& x, const Tensor& W, const Tensor& b, Activation act) {
    require(x.rank() == 2, "conv1d: input must be rank 2, got " + Tensor::shape_string(x.shape()));
    require(W.rank() == 3, "conv1d: kernel must be rank 3, got " + Tensor::shape_string(W.shape()));
    std::size_t length = x.dim(0), cin = x.dim(1);
    std::size_t cout = W.dim(0), k = W.dim(1);
    require(W.dim(2) == cin, "conv1d: kernel channels " + std::to_string(W.dim(2)) +
                                 " do not match input channels " + std::to_string(cin));
    require(b.rank() == 1 && b.dim(0) == cout, "conv1d: bias does not match filter count");
    if (length < k) {
        throw ShapeError("conv1d: window of length " + std::to_string(length) +
                         " is shorter than kernel " + std::to_string(k));
    }
    std::size_t lout = length - k + 1;
    Tensor y({lout, cout});
    // rows t..t+k-1 of x are contiguous, so each output value is one dot of
    // length k*cin against the flat kernel for that filter
    std::size_t span = k * cin;
    for (std::size_t t = 0; t < lout; ++t) {
        const double* window = x.data() + t * cin;
        double* yr = y.data() + t * cout;
        for (std::size_t o = 0; o < cout; ++o) {
            yr[o] = b[o] + dot(W.data() + o * span, window, span);
        }
        apply_activation(yr, cout, act);
    }
    return y;
}

Tensor maxpool1d_forward(const Tensor& x, std::size_t pool) {
    require(x.rank() == 2, "maxpool1d: input must be rank 2");
    require(pool >= 1, "maxpool1d: pool must be >= 1");
    std::size_t length = x.dim(0), channels = x.dim(1);
    if (pool > length) {
        throw ShapeError("maxpool1d: pool " + std::to_string(pool) + " over length " +
                         std::to_string(length) + " gives an empty output");
    }
    std::size_t lout = length / pool;
    Tensor y({lout, channels});
    for (std::size_t m = 0; m < lout; ++m) {
        for (std::size_t c = 0; c < channels; ++c) {
            double best = x(m * pool, c);
            for (std::size_t j = 1; j < pool; ++j) best = std::max(best, x(m * pool + j, c));
            y(m, c) = best;
        }
    }
    return y;
}

Tensor global_maxpool1d_forward(const Tensor& x) {
    require(x.rank() == 2 && x.dim(0) >= 1, "global_maxpool1d: input must be a nonempty sequence");
    std::size_t length = x.dim(0), channels = x.dim(1);
    Tensor y({channels});
    for (std::size_t c = 0; c < channels; ++c) y[c] = x(0, c);
    for (std::size_t t = 1; t < length; ++t) {
        for (std::size_t c = 0; c < channels; ++c) y[c] = std::max(y[c], x(t, c));
    }
    return y;
}

Tensor simple_rnn_forward(const Tensor& x, const Tensor& W, const Tensor& U, const Tensor& b,
                          Activation act, bool return_sequences) {
    require(x.rank() == 2, "simple_rnn: input must be rank 2");
    std::size_t length = x.dim(0), cin = x.dim(1);
    require(W.rank() == 2 && W.dim(0) == cin, "simple_rnn: input kernel does not match input channels");
    std::size_t u = W.dim(1);
    require(U.rank() == 2 && U.dim(0) == u && U.dim(1) == u, "simple_rnn: recurrent kernel must be u x u");
    require(b.rank() == 1 && b.dim(0) == u, "simple_rnn: bias must have u entries");
    Tensor hs({length, u});
    std::vector<double> h(u, 0.0);
    for (std::size_t t = 0; t < length; ++t) {
        double* ht = hs.data() + t * u;
        for (std::size_t j = 0; j < u; ++j) ht[j] = b[j];
        add_vec_mat(x.data() + t * cin, W.data(), cin, u, ht);
        add_vec_mat(h.data(), U.data(), u, u, ht);
        apply_activation(ht, u, act);
        std::copy(ht, ht + u, h.begin());
    }
    if (return_sequences) return hs;
    return Tensor({u}, std::vector<double>(h.begin(), h.end()));
}

Tensor lstm_forward(const Tensor& x, const Tensor& W, const Tensor& U, const Tensor& b,
                    bool return_sequences) {
    require(x.rank() == 2, "lstm: input must be rank 2");
    std::size_t length = x.dim(0), cin = x.dim(1);
    require(W.rank() == 2 && W.dim(0) == cin && W.dim(1) % 4 == 0,
            "lstm: input kernel must be cin x 4u");
    std::size_t u = W.dim(1) / 4;
    require(U.rank() == 2 && U.dim(0) == u && U.dim(1) == 4 * u, "lstm: recurrent kernel must be u x 4u");
    require(b.rank() == 1 && b.dim(0) == 4 * u, "lstm: bias must have 4u entries");
    Tensor hs({length, u});
    std::vector<double> h(u, 0.0), c(u, 0.0), gates(4 * u);
    for (std::size_t t = 0; t < length; ++t) {
        for (std::size_t j = 0; j < 4 * u; ++j) gates[j] = b[j];
        add_vec_mat(x.data() + t * cin, W.data(), cin, 4 * u, gates.data());
        add_vec_mat(h.data(), U.data(), u, 4 * u, gates.data());
        double* ht = hs.data() + t * u;
        for (std::size_t j = 0; j < u; ++j) {
            double ig = sigmoid(gates[j]);
            double fg = sigmoid(gates[u + j]);
            double gg = std::tanh(gates[2 * u + j]);
            double og = sigmoid(gates[3 * u + j]);
            c[j] = fg * c[j] + ig * gg;
            ht[j] = og * std::tanh(c[j]);
        }
        std::copy(ht, ht + u, h.begin());
    }
    if (return_sequences) return hs;
    return Tensor({u}, std::vector<double>(h.begin(), h.end()));
}

Tensor gru_forward(const Tensor& x, const Tensor& W, const Tensor& U, const Tensor& b_in,
                   const Tensor& b_rec, bool return_sequences) {
    require(x.rank() == 2, "gru: input must be rank 2");
    std::size_t length = x.dim(0), cin = x.dim(1);
    require(W.rank() == 2 && W.dim(0) == cin && W.dim(1) % 3 == 0, "gru: input kernel must be cin x 3u");
    std::size_t u = W.dim(1) / 3;
    require(U.rank() == 2 && U.dim(0) == u && U.dim(1) == 3 * u, "gru: recurrent kernel must be u x 3u");
    require(b_in.rank() == 1 && b_in.dim(0) == 3 * u, "gru: input bias must have 3u entries");
    require(b_rec.rank() == 1 && b_rec.dim(0) == 3 * u, "gru: recurrent bias must have 3u entries");
    Tensor hs({length, u});
    std::vector<double> h(u, 0.0), a_in(3 * u), a_rec(3 * u);
    for (std::size_t t = 0; t < length; ++t) {
        for (std::size_t j = 0; j < 3 * u; ++j) a_in[j] = b_in[j];
        add_vec_mat(x.data() + t * cin, W.data(), cin, 3 * u, a_in.data());
        for (std::size_t j = 0; j < 3 * u; ++j) a_rec[j] = b_rec[j];
        add_vec_mat(h.data(), U.data(), u, 3 * u, a_rec.data());
        double* ht = hs.data() + t * u;
        for (std::size_t j = 0; j < u; ++j) {
            double zg = sigmoid(a_in[j] + a_rec[j]);
            double rg = sigmoid(a_in[u + j] + a_rec[u + j]);
            double cand = std::tanh(a_in[2 * u + j] + rg * a_rec[2 * u + j]);
            ht[j] = zg * h[j] + (1.0 - zg) * cand;
        }
        std::copy(ht, ht + u, h.begin());
    }
    if (return_sequences) return hs;
    return Tensor({u}, std::vector<double>(h.begin(), h.end()));
}

Tensor dropout_apply(const Tensor& x, double rate, Rng& rng, bool training) {
    if (rate < 0.0 || rate >= 1.0) {
        throw ShapeError("dropout: rate must lie in [0,1), got " + std::to_string(rate));
    }
    if (!training || rate == 0.0) return x;
    Tensor y = x;
    double scale = 1.0 / (1.0 - rate);
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = rng.uniform() < rate ? 0.0 : y[i] * scale;
    }
    return y;
}

}  // namespace har::nn
