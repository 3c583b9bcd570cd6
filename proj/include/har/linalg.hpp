#pragma once

#include <cstddef>

namespace har {

// Tight loops the whole engine is built on; all operate on row-major buffers.

inline double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

// y += alpha * x
inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

// y[j] += sum_i x[i] * W[i*out + j]   (vector times matrix, W is in x out)
inline void add_vec_mat(const double* x, const double* W, std::size_t in, std::size_t out, double* y) {
    for (std::size_t i = 0; i < in; ++i) {
        axpy(x[i], W + i * out, y, out);
    }
}

// y[i] += sum_j g[j] * W[i*out + j]   (matrix times vector from the right)
inline void add_mat_vec_t(const double* g, const double* W, std::size_t in, std::size_t out, double* y) {
    for (std::size_t i = 0; i < in; ++i) {
        y[i] += dot(W + i * out, g, out);
    }
}

// W[i*out + j] += x[i] * g[j]   (outer-product accumulate)
inline void add_outer(const double* x, const double* g, double* W, std::size_t in, std::size_t out) {
    for (std::size_t i = 0; i < in; ++i) {
        axpy(x[i], g, W + i * out, out);
    }
}

}  // namespace har
