#pragma once

// Hand-rolled reference implementations the engine is checked against.
// Deliberately naive: plain loops and textbook formulas, sharing nothing
// with the library beyond the Tensor container and the parameter packing
// conventions (which are part of the weight-file contract).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "har/layers.hpp"
#include "har/params.hpp"
#include "har/tensor.hpp"

namespace oracle {

using har::Tensor;

inline double activate(double z, const std::string& act) {
    if (act == "relu") return z > 0.0 ? z : 0.0;
    if (act == "tanh") return std::tanh(z);
    if (act == "sigmoid") return 1.0 / (1.0 + std::exp(-z));
    return z;  // none / linear
}

inline std::vector<double> softmax(const std::vector<double>& z) {
    double zmax = z[0];
    for (double v : z) zmax = std::max(zmax, v);
    std::vector<double> p(z.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        p[i] = std::exp(z[i] - zmax);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

// y_j = act(b_j + sum_i x_i W[i][j]); "softmax" applies the normalized
// exponential after the affine map
inline std::vector<double> dense(const std::vector<double>& x, const Tensor& W, const Tensor& b,
                                 const std::string& act) {
    const std::size_t in = W.dim(0), out = W.dim(1);
    std::vector<double> y(out);
    for (std::size_t j = 0; j < out; ++j) {
        double z = b[j];
        for (std::size_t i = 0; i < in; ++i) z += x[i] * W[i * out + j];
        y[j] = z;
    }
    if (act == "softmax") return softmax(y);
    for (double& v : y) v = activate(v, act);
    return y;
}

// valid convolution, stride 1, kernel W[cout][dt][cin]:
// y[t][o] = act(b_o + sum_dt sum_c x[t+dt][c] W[o][dt][c])
inline Tensor conv1d(const Tensor& x, const Tensor& W, const Tensor& b, const std::string& act) {
    const std::size_t steps = x.dim(0), cin = x.dim(1);
    const std::size_t cout = W.dim(0), k = W.dim(1);
    const std::size_t out_steps = steps - k + 1;
    Tensor y({out_steps, cout});
    for (std::size_t t = 0; t < out_steps; ++t) {
        for (std::size_t o = 0; o < cout; ++o) {
            double z = b[o];
            for (std::size_t dt = 0; dt < k; ++dt)
                for (std::size_t c = 0; c < cin; ++c)
                    z += x[(t + dt) * cin + c] * W[(o * k + dt) * cin + c];
            y[t * cout + o] = activate(z, act);
        }
    }
    return y;
}

// non-overlapping max pooling; a trailing remainder shorter than the pool
// width is dropped
inline Tensor maxpool1d(const Tensor& x, std::size_t pool) {
    const std::size_t steps = x.dim(0), ch = x.dim(1);
    const std::size_t out_steps = steps / pool;
    Tensor y({out_steps, ch});
    for (std::size_t t = 0; t < out_steps; ++t)
        for (std::size_t c = 0; c < ch; ++c) {
            double best = x[(t * pool) * ch + c];
            for (std::size_t i = 1; i < pool; ++i)
                best = std::max(best, x[(t * pool + i) * ch + c]);
            y[t * ch + c] = best;
        }
    return y;
}

inline std::vector<double> global_maxpool(const Tensor& x) {
    const std::size_t steps = x.dim(0), ch = x.dim(1);
    std::vector<double> y(ch);
    for (std::size_t c = 0; c < ch; ++c) {
        double best = x[c];
        for (std::size_t t = 1; t < steps; ++t) best = std::max(best, x[t * ch + c]);
        y[c] = best;
    }
    return y;
}

// h_t = act(x_t W + h_{t-1} U + b), h_0 = 0
inline Tensor simple_rnn(const Tensor& x, const Tensor& W, const Tensor& U, const Tensor& b,
                         const std::string& act, bool return_sequences) {
    const std::size_t steps = x.dim(0), cin = x.dim(1), u = W.dim(1);
    std::vector<double> h(u, 0.0);
    Tensor seq({steps, u});
    for (std::size_t t = 0; t < steps; ++t) {
        std::vector<double> hnew(u);
        for (std::size_t j = 0; j < u; ++j) {
            double z = b[j];
            for (std::size_t c = 0; c < cin; ++c) z += x[t * cin + c] * W[c * u + j];
            for (std::size_t k = 0; k < u; ++k) z += h[k] * U[k * u + j];
            hnew[j] = activate(z, act);
        }
        h = hnew;
        for (std::size_t j = 0; j < u; ++j) seq[t * u + j] = h[j];
    }
    if (return_sequences) return seq;
    return Tensor({u}, std::vector<double>(h.begin(), h.end()));
}

// gate columns packed [i | f | g | o] in W (cin x 4u), U (u x 4u), b (4u):
//   i,f,o sigmoid; g tanh; c_t = f*c + i*g; h_t = o * tanh(c_t)
inline Tensor lstm(const Tensor& x, const Tensor& W, const Tensor& U, const Tensor& b,
                   bool return_sequences) {
    const std::size_t steps = x.dim(0), cin = x.dim(1), u = W.dim(1) / 4;
    std::vector<double> h(u, 0.0), c(u, 0.0);
    Tensor seq({steps, u});
    for (std::size_t t = 0; t < steps; ++t) {
        std::vector<double> z(4 * u);
        for (std::size_t j = 0; j < 4 * u; ++j) {
            double a = b[j];
            for (std::size_t ci = 0; ci < cin; ++ci) a += x[t * cin + ci] * W[ci * 4 * u + j];
            for (std::size_t k = 0; k < u; ++k) a += h[k] * U[k * 4 * u + j];
            z[j] = a;
        }
        for (std::size_t j = 0; j < u; ++j) {
            const double ig = activate(z[j], "sigmoid");
            const double fg = activate(z[u + j], "sigmoid");
            const double gg = std::tanh(z[2 * u + j]);
            const double og = activate(z[3 * u + j], "sigmoid");
            c[j] = fg * c[j] + ig * gg;
            h[j] = og * std::tanh(c[j]);
        }
        for (std::size_t j = 0; j < u; ++j) seq[t * u + j] = h[j];
    }
    if (return_sequences) return seq;
    return Tensor({u}, std::vector<double>(h.begin(), h.end()));
}

// double-bias formulation, gate columns packed [z | r | h]:
//   z_t = sig(x W_z + b_in_z + h U_z + b_rec_z)
//   r_t = sig(x W_r + b_in_r + h U_r + b_rec_r)
//   hh  = tanh(x W_h + b_in_h + r * (h U_h + b_rec_h))
//   h_t = z_t * h + (1 - z_t) * hh
inline Tensor gru(const Tensor& x, const Tensor& W, const Tensor& U, const Tensor& b_in,
                  const Tensor& b_rec, bool return_sequences) {
    const std::size_t steps = x.dim(0), cin = x.dim(1), u = W.dim(1) / 3;
    std::vector<double> h(u, 0.0);
    Tensor seq({steps, u});
    for (std::size_t t = 0; t < steps; ++t) {
        std::vector<double> a_in(3 * u), a_rec(3 * u);
        for (std::size_t j = 0; j < 3 * u; ++j) {
            double ai = b_in[j];
            for (std::size_t ci = 0; ci < cin; ++ci) ai += x[t * cin + ci] * W[ci * 3 * u + j];
            a_in[j] = ai;
            double ar = b_rec[j];
            for (std::size_t k = 0; k < u; ++k) ar += h[k] * U[k * 3 * u + j];
            a_rec[j] = ar;
        }
        std::vector<double> hnew(u);
        for (std::size_t j = 0; j < u; ++j) {
            const double zg = activate(a_in[j] + a_rec[j], "sigmoid");
            const double rg = activate(a_in[u + j] + a_rec[u + j], "sigmoid");
            const double cand = std::tanh(a_in[2 * u + j] + rg * a_rec[2 * u + j]);
            hnew[j] = zg * h[j] + (1.0 - zg) * cand;
        }
        h = hnew;
        for (std::size_t j = 0; j < u; ++j) seq[t * u + j] = h[j];
    }
    if (return_sequences) return seq;
    return Tensor({u}, std::vector<double>(h.begin(), h.end()));
}

// window count by walking the offsets, no closed formula
inline std::size_t count_windows(std::size_t length, std::size_t window, std::size_t stride) {
    std::size_t n = 0;
    for (std::size_t off = 0; off + window <= length; off += stride) ++n;
    return n;
}

// one textbook Adam update (t is the 1-based step number after this update)
inline void adam_step(std::vector<double>& theta, const std::vector<double>& grad,
                      std::vector<double>& m, std::vector<double>& v, std::size_t t, double lr,
                      double b1, double b2, double eps) {
    for (std::size_t i = 0; i < theta.size(); ++i) {
        m[i] = b1 * m[i] + (1.0 - b1) * grad[i];
        v[i] = b2 * v[i] + (1.0 - b2) * grad[i] * grad[i];
        const double mhat = m[i] / (1.0 - std::pow(b1, static_cast<double>(t)));
        const double vhat = v[i] / (1.0 - std::pow(b2, static_cast<double>(t)));
        theta[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

inline double cross_entropy(const std::vector<double>& p, const std::vector<double>& y) {
    double loss = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (y[i] != 0.0) loss -= y[i] * std::log(std::max(p[i], 1e-12));
    return loss;
}

// full-model inference-mode forward pass composed from the naive ops above;
// dropout is the identity, exactly like the engine with training disabled
inline std::vector<double> model_forward(const har::nn::ModelSpec& spec,
                                         const har::nn::ParameterBundle& params, const Tensor& x) {
    using har::nn::Activation;
    using har::nn::LayerKind;
    Tensor seq = x;
    std::vector<double> vec;
    bool is_seq = true;
    std::size_t cursor = 0;
    auto next = [&]() -> const Tensor& { return params.tensors.at(cursor++).value; };
    for (const har::nn::LayerSpec& layer : spec.layers) {
        const std::string act = har::nn::activation_name(layer.activation);
        switch (layer.kind) {
            case LayerKind::Flatten: {
                vec.assign(seq.flat().begin(), seq.flat().end());
                is_seq = false;
                break;
            }
            case LayerKind::Dense: {
                const Tensor& W = next();
                const Tensor& b = next();
                vec = dense(vec, W, b, act);
                break;
            }
            case LayerKind::Conv1d: {
                const Tensor& W = next();
                const Tensor& b = next();
                seq = conv1d(seq, W, b, act);
                break;
            }
            case LayerKind::MaxPool1d:
                seq = maxpool1d(seq, layer.pool);
                break;
            case LayerKind::GlobalMaxPool1d:
                vec = global_maxpool(seq);
                is_seq = false;
                break;
            case LayerKind::SimpleRnn: {
                const Tensor& W = next();
                const Tensor& U = next();
                const Tensor& b = next();
                Tensor h = simple_rnn(seq, W, U, b, act, layer.return_sequences);
                if (layer.return_sequences) {
                    seq = h;
                } else {
                    vec.assign(h.flat().begin(), h.flat().end());
                    is_seq = false;
                }
                break;
            }
            case LayerKind::Lstm: {
                const Tensor& W = next();
                const Tensor& U = next();
                const Tensor& b = next();
                Tensor h = lstm(seq, W, U, b, layer.return_sequences);
                if (layer.return_sequences) {
                    seq = h;
                } else {
                    vec.assign(h.flat().begin(), h.flat().end());
                    is_seq = false;
                }
                break;
            }
            case LayerKind::Gru: {
                const Tensor& W = next();
                const Tensor& U = next();
                const Tensor& b_in = next();
                const Tensor& b_rec = next();
                Tensor h = gru(seq, W, U, b_in, b_rec, layer.return_sequences);
                if (layer.return_sequences) {
                    seq = h;
                } else {
                    vec.assign(h.flat().begin(), h.flat().end());
                    is_seq = false;
                }
                break;
            }
            case LayerKind::Dropout:
                break;
        }
    }
    (void)is_seq;
    return vec;
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

}  // namespace oracle
