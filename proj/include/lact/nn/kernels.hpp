#pragma once

#include <cstdint>
#include <vector>

// Dense numeric kernels behind the differentiable ops. The OpenMP versions
// give every output element to exactly one thread with a fixed summation
// order, so results are bitwise independent of the thread count. The
// *_reference functions are plain loops kept for tests and benchmarks.

namespace lact::nn::kernels {

/// C[M x N] (+)= A[M x K] * B[K x N], all row-major and contiguous.
template <class T>
void gemm(int m, int n, int k, const T* a, const T* b, T* c, bool accumulate);

template <class T>
void gemm_reference(int m, int n, int k, const T* a, const T* b, T* c, bool accumulate);

/// Geometry of a 2D cross-correlation with square kernel and symmetric padding.
struct ConvShape {
    int batch = 1;
    int in_channels = 1;
    int in_h = 1, in_w = 1;
    int out_channels = 1;
    int kernel = 1;
    int stride = 1;
    int pad = 0;

    int out_h() const { return (in_h + 2 * pad - kernel) / stride + 1; }
    int out_w() const { return (in_w + 2 * pad - kernel) / stride + 1; }
    int patch() const { return in_channels * kernel * kernel; }
    int out_pixels() const { return out_h() * out_w(); }
    std::int64_t in_size() const { return static_cast<std::int64_t>(in_channels) * in_h * in_w; }
    std::int64_t out_size() const { return static_cast<std::int64_t>(out_channels) * out_pixels(); }
    bool pointwise() const { return kernel == 1 && stride == 1 && pad == 0; }
};

/// col[patch x out_pixels] from one sample x[in_channels, in_h, in_w]; rows
/// are `ld` apart (out_pixels when ld <= 0).
template <class T>
void im2col(const ConvShape& s, const T* x, T* col, std::int64_t ld = 0);
/// Transposed layout col_t[out_pixels x patch].
template <class T>
void im2col_t(const ConvShape& s, const T* x, T* col_t);
/// Scatter-adds col[patch x out_pixels] (row stride `ld`) into x[in_channels, in_h, in_w].
template <class T>
void col2im(const ConvShape& s, const T* col, T* x, std::int64_t ld = 0);

/// y[N, Cout, Ho, Wo] = conv(x, w[Cout, Cin, k, k]) + bias (bias may be null).
template <class T>
void conv2d_forward(const ConvShape& s, const T* x, const T* w, const T* bias, T* y);
/// dx (+)= transpose-conv of dy with w. dx is overwritten unless accumulate.
template <class T>
void conv2d_backward_input(const ConvShape& s, const T* dy, const T* w, T* dx, bool accumulate);
/// dw += sum_n dy_n * col_n^T, db += sum over batch and pixels (db may be null).
template <class T>
void conv2d_backward_weight(const ConvShape& s, const T* x, const T* dy, T* dw, T* db);

template <class T>
void conv2d_forward_reference(const ConvShape& s, const T* x, const T* w, const T* bias, T* y);
template <class T>
void conv2d_backward_input_reference(const ConvShape& s, const T* dy, const T* w, T* dx);
template <class T>
void conv2d_backward_weight_reference(const ConvShape& s, const T* x, const T* dy, T* dw, T* db);

} // namespace lact::nn::kernels
