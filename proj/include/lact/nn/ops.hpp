#pragma once

#include "lact/nn/tensor.hpp"

#include <vector>

// Differentiable operations on NCHW tensors. Each op records a backward
// closure when gradients are enabled and an input requires one.

namespace lact::nn {

/// Cross-correlation; w is [Cout, Cin, k, k], bias [Cout] or undefined.
template <class T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias, int stride, int pad);

/// Adjoint of conv2d in x; w is [Cin, Cout, k, k]. Output side (H-1)s - 2p + k.
template <class T>
Tensor<T> conv_transpose2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias, int stride, int pad);

struct BatchNormOptions {
    bool training = true;
    double momentum = 0.1;
    double eps = 1e-5;
};

/// Per-channel normalization. In training mode running_mean/running_var
/// (plain value tensors of shape [C]) are updated in place.
template <class T>
Tensor<T> batch_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, Tensor<T>& running_mean,
                     Tensor<T>& running_var, const BatchNormOptions& opt);

/// x * Phi(x) with the exact Gaussian CDF.
template <class T>
Tensor<T> gelu(const Tensor<T>& x);

template <class T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);

template <class T>
Tensor<T> scale(const Tensor<T>& x, T factor);

/// Multiplies channel c by factors[c] (constants).
template <class T>
Tensor<T> channel_scale(const Tensor<T>& x, const std::vector<T>& factors);

/// Zero padding of the two spatial dims.
template <class T>
Tensor<T> pad2d(const Tensor<T>& x, int top, int bottom, int left, int right);

/// Average over bins [floor(i*H/oh), ceil((i+1)*H/oh)); works for oh > H too.
template <class T>
Tensor<T> adaptive_avg_pool2d(const Tensor<T>& x, int out_h, int out_w);

/// Counterclockwise rotation of each sample by angles_deg[n] about the image
/// centre, bilinear sampling, zero outside.
template <class T>
Tensor<T> rotate_bilinear(const Tensor<T>& x, const std::vector<double>& angles_deg);

template <class T>
Tensor<T> rotate_bilinear(const Tensor<T>& x, double angle_deg)
{
    return rotate_bilinear(x, std::vector<double>(static_cast<std::size_t>(x.dim(0)), angle_deg));
}

/// Mean of squared differences; target is treated as a constant.
template <class T>
Tensor<T> mse_loss(const Tensor<T>& pred, const Tensor<T>& target);

/// Scalar sum_i weights[i] * x[i] with constant weights.
template <class T>
Tensor<T> weighted_sum(const Tensor<T>& x, const std::vector<T>& weights);

/// Source position of output pixel (row, col) under a rotation of an n x n
/// image: top-left neighbour plus fractional offsets.
struct RotationSample {
    int r0, c0;
    double fr, fc;
};
RotationSample rotation_source(int n, int row, int col, double cos_a, double sin_a);
void rotation_cos_sin(double angle_deg, double& cos_a, double& sin_a);

} // namespace lact::nn
