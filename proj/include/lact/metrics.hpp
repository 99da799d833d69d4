#pragma once

#include "lact/geometry.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace lact::metrics {

struct BinaryMask {
    int size = 0;
    std::vector<std::uint8_t> values;

    BinaryMask() = default;
    explicit BinaryMask(int n) : size(n), values(static_cast<std::size_t>(n) * n, 0) {}
    std::size_t count() const;
    BinaryMask inverted() const;
};

/// Pixel is set iff value > mean(image). A constant image gives an empty mask.
BinaryMask threshold_mean(const Image& image);

struct Confusion {
    std::int64_t tp = 0, tn = 0, fp = 0, fn = 0;
};

Confusion confusion(const BinaryMask& pred, const BinaryMask& gt);
/// Matthews correlation; 0 when any marginal is empty.
double mcc(const Confusion& c);
double mcc(const BinaryMask& pred, const BinaryMask& gt);

inline constexpr double kInfinitePsnr = std::numeric_limits<double>::infinity();

/// 10 log10(range^2 / MSE); identical images give +infinity.
double psnr(const Image& pred, const Image& gt, double data_range);
/// data_range defaults to max(gt) - min(gt).
double psnr(const Image& pred, const Image& gt);

/// Mean SSIM over all valid 11x11 Gaussian windows (sigma 1.5, K1 0.01, K2 0.03).
double ssim(const Image& pred, const Image& gt, double data_range);
double ssim(const Image& pred, const Image& gt);

double data_range_of(const Image& gt);

/// Sum of per-image MCC values of one level.
double score_level(std::span<const BinaryMask> preds, std::span<const BinaryMask> gts);

} // namespace lact::metrics
