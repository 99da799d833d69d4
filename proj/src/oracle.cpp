#include "lact/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace lact {

namespace {

double sample(std::span<const double> img, int n, double ps, double x, double y, Sampling mode)
{
    const double half = 0.5 * n * ps;
    if (x < -half || x > half || y < -half || y > half)
        return 0.0;
    // Continuous pixel coordinates with pixel centers on integers.
    const double u = (x + half) / ps - 0.5;
    const double v = (half - y) / ps - 0.5;
    if (mode == Sampling::nearest) {
        const int c = std::clamp(static_cast<int>(std::floor(u + 0.5)), 0, n - 1);
        const int r = std::clamp(static_cast<int>(std::floor(v + 0.5)), 0, n - 1);
        return img[static_cast<std::size_t>(r) * n + c];
    }
    const double uc = std::clamp(u, 0.0, n - 1.0);
    const double vc = std::clamp(v, 0.0, n - 1.0);
    const int c0 = std::min(static_cast<int>(uc), n - 1);
    const int r0 = std::min(static_cast<int>(vc), n - 1);
    const int c1 = std::min(c0 + 1, n - 1);
    const int r1 = std::min(r0 + 1, n - 1);
    const double fu = uc - c0, fv = vc - r0;
    auto at = [&](int r, int c) { return img[static_cast<std::size_t>(r) * n + c]; };
    return (1 - fv) * ((1 - fu) * at(r0, c0) + fu * at(r0, c1)) + fv * ((1 - fu) * at(r1, c0) + fu * at(r1, c1));
}

} // namespace

double line_integral_oracle(std::span<const double> image, int size, double pixel_size, const Ray& ray,
                            double step, Sampling mode)
{
    const double dx = ray.ex - ray.sx, dy = ray.ey - ray.sy;
    const double len = std::hypot(dx, dy);
    const double ux = dx / len, uy = dy / len;
    // Only the part of the ray near the image contributes; the half-diagonal
    // bound keeps the sample count manageable.
    const double tc = -(ray.sx * ux + ray.sy * uy);
    const double reach = 0.5 * size * pixel_size * std::sqrt(2.0) + pixel_size;
    const double t0 = std::max(0.0, tc - reach);
    const double t1 = std::min(len, tc + reach);
    if (t1 <= t0)
        return 0.0;
    const auto count = static_cast<long>(std::ceil((t1 - t0) / step));
    double sum = 0.0;
    for (long i = 0; i < count; ++i) {
        const double a = t0 + i * step;
        const double b = std::min(a + step, t1);
        const double t = 0.5 * (a + b);
        sum += sample(image, size, pixel_size, ray.sx + t * ux, ray.sy + t * uy, mode) * (b - a);
    }
    return sum;
}

} // namespace lact
