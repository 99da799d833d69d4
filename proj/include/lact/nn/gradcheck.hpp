#pragma once

#include "lact/nn/tensor.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace lact::nn {

using DoubleOp = std::function<Tensor<double>(const std::vector<Tensor<double>>&)>;

struct GradCheckReport {
    /// max |analytic - numeric| / max |numeric|, one entry per input.
    std::vector<double> max_rel_error;
    double worst() const;
};

/// Compares reverse-mode gradients of sum(r * op(inputs)) against central
/// differences with step h_scale * (1 + |x|). `r` is drawn from `seed`.
GradCheckReport grad_check(const DoubleOp& op, std::vector<Tensor<double>> inputs, std::uint64_t seed,
                           double h_scale = 1e-5);

} // namespace lact::nn
