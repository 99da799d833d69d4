#pragma once

#include "lact/geometry.hpp"
#include "lact/rng.hpp"

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

namespace lact::test {

/// Desk geometry shrunk to an n x n grid with the same physical extent.
inline FanBeamGeometry small_geometry(int n, int angles, double step_deg)
{
    FanBeamGeometry g = FanBeamGeometry::desk();
    g.image_pixel_size = g.image_pixel_size * g.image_size / n;
    g.image_size = n;
    g.num_angles = angles;
    g.angle_step_deg = step_deg;
    return g;
}

/// Sum of a few Gaussian bumps inside the inscribed circle.
inline std::vector<double> smooth_phantom(int n, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<double> img(static_cast<std::size_t>(n) * n, 0.0);
    for (int b = 0; b < 4; ++b) {
        const double cx = uniform(rng, 0.3, 0.7) * (n - 1), cy = uniform(rng, 0.3, 0.7) * (n - 1);
        const double s = uniform(rng, 0.15, 0.3) * n, a = uniform(rng, 0.5, 1.0);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c)
                img[static_cast<std::size_t>(r) * n + c] +=
                    a * std::exp(-((c - cx) * (c - cx) + (r - cy) * (r - cy)) / (2 * s * s));
    }
    return img;
}

inline std::vector<double> random_values(std::size_t count, std::uint64_t seed, double lo = -1.0, double hi = 1.0)
{
    Rng rng(seed);
    std::vector<double> v(count);
    for (auto& x : v)
        x = uniform(rng, lo, hi);
    return v;
}

inline Image to_image(const std::vector<double>& v, int n)
{
    Image img(n);
    for (std::size_t i = 0; i < v.size(); ++i)
        img.values[i] = static_cast<float>(v[i]);
    return img;
}

/// Centered uniform disk of the given radius in pixels.
inline Image disk_image(int n, double radius_px, float value = 1.0f)
{
    Image img(n);
    const double c = 0.5 * (n - 1);
    for (int r = 0; r < n; ++r)
        for (int col = 0; col < n; ++col)
            if ((r - c) * (r - c) + (col - c) * (col - c) <= radius_px * radius_px)
                img.at(r, col) = value;
    return img;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("lact_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline double rel_l2(const std::vector<double>& a, const std::vector<double>& b)
{
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

} // namespace lact::test
