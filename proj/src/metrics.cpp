#include "lact/metrics.hpp"

#include "lact/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace lact::metrics {

std::size_t BinaryMask::count() const
{
    return static_cast<std::size_t>(std::count(values.begin(), values.end(), std::uint8_t{1}));
}

BinaryMask BinaryMask::inverted() const
{
    BinaryMask m = *this;
    for (auto& v : m.values)
        v = v ? 0 : 1;
    return m;
}

BinaryMask threshold_mean(const Image& image)
{
    if (image.values.empty())
        throw ShapeError("cannot threshold an empty image");
    double sum = 0.0;
    for (float v : image.values)
        sum += v;
    const double mean = sum / static_cast<double>(image.values.size());
    BinaryMask m(image.size);
    for (std::size_t i = 0; i < image.values.size(); ++i)
        m.values[i] = static_cast<double>(image.values[i]) > mean ? 1 : 0;
    return m;
}

Confusion confusion(const BinaryMask& pred, const BinaryMask& gt)
{
    if (pred.values.size() != gt.values.size())
        throw ShapeError("mask sizes differ");
    Confusion c;
    for (std::size_t i = 0; i < pred.values.size(); ++i) {
        const bool p = pred.values[i] != 0, g = gt.values[i] != 0;
        if (p && g)
            ++c.tp;
        else if (!p && !g)
            ++c.tn;
        else if (p)
            ++c.fp;
        else
            ++c.fn;
    }
    return c;
}

double mcc(const Confusion& c)
{
    const double tp = static_cast<double>(c.tp), tn = static_cast<double>(c.tn);
    const double fp = static_cast<double>(c.fp), fn = static_cast<double>(c.fn);
    const double den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    if (den == 0.0)
        return 0.0;
    return (tp * tn - fp * fn) / std::sqrt(den);
}

double mcc(const BinaryMask& pred, const BinaryMask& gt)
{
    return mcc(confusion(pred, gt));
}

namespace {

void check_same(const Image& a, const Image& b)
{
    if (a.size != b.size || a.values.size() != b.values.size())
        throw ShapeError("image sizes differ");
}

} // namespace

double data_range_of(const Image& gt)
{
    const auto [lo, hi] = std::minmax_element(gt.values.begin(), gt.values.end());
    return static_cast<double>(*hi) - static_cast<double>(*lo);
}

double psnr(const Image& pred, const Image& gt, double data_range)
{
    check_same(pred, gt);
    double se = 0.0;
    for (std::size_t i = 0; i < gt.values.size(); ++i) {
        const double d = static_cast<double>(pred.values[i]) - gt.values[i];
        se += d * d;
    }
    const double mse = se / static_cast<double>(gt.values.size());
    if (mse == 0.0)
        return kInfinitePsnr;
    return 10.0 * std::log10(data_range * data_range / mse);
}

double psnr(const Image& pred, const Image& gt)
{
    return psnr(pred, gt, data_range_of(gt));
}

double ssim(const Image& pred, const Image& gt, double data_range)
{
    check_same(pred, gt);
    constexpr int win = 11;
    constexpr double sigma = 1.5;
    const int n = gt.size;
    if (n < win)
        throw ShapeError("SSIM needs images of at least 11 x 11 pixels");

    std::array<double, win> g1{};
    double gsum = 0.0;
    for (int i = 0; i < win; ++i) {
        const double d = i - win / 2;
        g1[i] = std::exp(-d * d / (2 * sigma * sigma));
        gsum += g1[i];
    }
    for (double& v : g1)
        v /= gsum;

    const double c1 = (0.01 * data_range) * (0.01 * data_range);
    const double c2 = (0.03 * data_range) * (0.03 * data_range);
    const int out = n - win + 1;
    double total = 0.0;
    for (int r = 0; r < out; ++r) {
        for (int c = 0; c < out; ++c) {
            double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
            for (int i = 0; i < win; ++i)
                for (int j = 0; j < win; ++j) {
                    const double w = g1[i] * g1[j];
                    const double x = pred.at(r + i, c + j), y = gt.at(r + i, c + j);
                    mx += w * x;
                    my += w * y;
                    sxx += w * x * x;
                    syy += w * y * y;
                    sxy += w * x * y;
                }
            const double vx = sxx - mx * mx, vy = syy - my * my, cxy = sxy - mx * my;
            total += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
        }
    }
    return total / (static_cast<double>(out) * out);
}

double ssim(const Image& pred, const Image& gt)
{
    return ssim(pred, gt, data_range_of(gt));
}

double score_level(std::span<const BinaryMask> preds, std::span<const BinaryMask> gts)
{
    if (preds.size() != gts.size())
        throw ShapeError("prediction and ground-truth counts differ");
    double s = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i)
        s += mcc(preds[i], gts[i]);
    return s;
}

} // namespace lact::metrics
