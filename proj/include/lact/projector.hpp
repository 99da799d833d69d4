#pragma once

#include "lact/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>

namespace lact {

/// Straight segment from a point source to a detector cell center.
struct Ray {
    double sx, sy;   // source
    double ex, ey;   // end point (detector cell center)
};

Ray detector_ray(const FanBeamGeometry& g, int row, int det);

/// Exact pixel-intersection traversal (Siddon). Calls visit(pixel_index, length_mm)
/// for every pixel the segment crosses, in increasing ray-parameter order.
template <class Visit>
void trace_ray(const FanBeamGeometry& g, const Ray& r, Visit&& visit)
{
    const int n = g.image_size;
    const double ps = g.image_pixel_size;
    const double half = 0.5 * n * ps;
    const double dx = r.ex - r.sx;
    const double dy = r.ey - r.sy;
    const double len = std::hypot(dx, dy);
    constexpr double inf = std::numeric_limits<double>::infinity();

    // Clip the parametric segment [0, 1] against the image square.
    double a0 = 0.0, a1 = 1.0;
    auto clip = [&](double s, double d) {
        if (d == 0.0)
            return s >= -half && s <= half;
        double t0 = (-half - s) / d;
        double t1 = (half - s) / d;
        if (t0 > t1)
            std::swap(t0, t1);
        a0 = std::max(a0, t0);
        a1 = std::min(a1, t1);
        return a0 < a1;
    };
    if (!clip(r.sx, dx) || !clip(r.sy, dy))
        return;

    const double x0 = r.sx + a0 * dx;
    const double y0 = r.sy + a0 * dy;
    int col = std::clamp(static_cast<int>(std::floor((x0 + half) / ps)), 0, n - 1);
    int row = std::clamp(static_cast<int>(std::floor((half - y0) / ps)), 0, n - 1);

    const int col_step = dx > 0 ? 1 : -1;
    const int row_step = dy < 0 ? 1 : -1;
    auto next_x = [&](int c) {
        if (dx == 0.0)
            return inf;
        const double plane = -half + (dx > 0 ? c + 1 : c) * ps;
        return (plane - r.sx) / dx;
    };
    auto next_y = [&](int rw) {
        if (dy == 0.0)
            return inf;
        const double plane = half - (dy < 0 ? rw + 1 : rw) * ps;
        return (plane - r.sy) / dy;
    };

    double ax = next_x(col);
    double ay = next_y(row);
    double a = a0;
    while (a < a1) {
        const double an = std::min({ax, ay, a1});
        const double seg = (an - a) * len;
        if (seg > 0.0)
            visit(static_cast<std::int64_t>(row) * n + col, seg);
        a = an;
        if (an == ax) {
            col += col_step;
            if (col < 0 || col >= n)
                break;
            ax = next_x(col);
        }
        if (an == ay) {
            row += row_step;
            if (row < 0 || row >= n)
                break;
            ay = next_y(row);
        }
    }
}

// Raw kernels on flat arrays. `image` has image_size^2 entries and `sino`
// num_angles * num_detectors entries. Outputs are overwritten.

/// OpenMP over angle rows; each entry is accumulated by one thread in ray order.
template <class T>
void forward_project(std::span<const T> image, std::span<T> sino, const FanBeamGeometry& g);

/// Transposed accumulation with the same weights. Angles are split into a fixed
/// number of blocks reduced in block order, so results do not depend on the
/// thread count.
template <class T>
void back_project(std::span<const T> sino, std::span<T> image, const FanBeamGeometry& g);

/// Single-threaded references kept for tests and benchmarks.
template <class T>
void forward_project_serial(std::span<const T> image, std::span<T> sino, const FanBeamGeometry& g);
template <class T>
void back_project_serial(std::span<const T> sino, std::span<T> image, const FanBeamGeometry& g);

/// y = A x for a checked image/geometry pair.
Sinogram forward_project(const Image& image, const FanBeamGeometry& g);
/// A^T y.
Image back_project(const Sinogram& sino, const FanBeamGeometry& g);

/// Rows alpha..beta (inclusive) of `sino`; the window must satisfy the
/// AngularWindow constraints.
Sinogram extract_window(const Sinogram& sino, const AngularWindow& w);
/// Unconstrained inclusive row slice by angle; both ends must lie on the grid.
Sinogram slice_angles(const Sinogram& sino, double first_deg, double last_deg);

/// Adds seeded N(0, sigma^2) noise; sigma == 0 returns an exact copy.
Sinogram add_noise(const Sinogram& sino, double sigma, std::uint64_t seed);

} // namespace lact
