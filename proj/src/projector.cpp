#include "lact/projector.hpp"

#include "lact/errors.hpp"
#include "lact/rng.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace lact {

namespace {

constexpr int kBackProjectBlocks = 16;

void check_sizes(std::size_t image_len, std::size_t sino_len, const FanBeamGeometry& g)
{
    g.validate();
    const auto n = static_cast<std::size_t>(g.image_size);
    if (image_len != n * n)
        throw GeometryError("image size does not match geometry");
    if (sino_len != static_cast<std::size_t>(g.num_angles) * g.num_detectors)
        throw GeometryError("sinogram size does not match geometry");
}

template <class T>
void project_row(std::span<const T> image, T* out, const FanBeamGeometry& g, int row)
{
    for (int k = 0; k < g.num_detectors; ++k) {
        double acc = 0.0;
        trace_ray(g, detector_ray(g, row, k),
                  [&](std::int64_t pix, double len) { acc += len * static_cast<double>(image[pix]); });
        out[k] = static_cast<T>(acc);
    }
}

template <class T>
void smear_row(const T* in, double* image, const FanBeamGeometry& g, int row)
{
    for (int k = 0; k < g.num_detectors; ++k) {
        const double v = static_cast<double>(in[k]);
        if (v == 0.0)
            continue;
        trace_ray(g, detector_ray(g, row, k), [&](std::int64_t pix, double len) { image[pix] += len * v; });
    }
}

} // namespace

Ray detector_ray(const FanBeamGeometry& g, int row, int det)
{
    const double t = g.angle_deg(row) * std::numbers::pi / 180.0;
    const double c = std::cos(t), s = std::sin(t);
    const double u = g.detector_offset(det);
    Ray r;
    r.sx = g.source_to_center * c;
    r.sy = g.source_to_center * s;
    r.ex = -g.center_to_detector * c - u * s;
    r.ey = -g.center_to_detector * s + u * c;
    return r;
}

template <class T>
void forward_project(std::span<const T> image, std::span<T> sino, const FanBeamGeometry& g)
{
    check_sizes(image.size(), sino.size(), g);
#pragma omp parallel for schedule(dynamic, 4)
    for (int row = 0; row < g.num_angles; ++row)
        project_row(image, sino.data() + static_cast<std::size_t>(row) * g.num_detectors, g, row);
}

template <class T>
void forward_project_serial(std::span<const T> image, std::span<T> sino, const FanBeamGeometry& g)
{
    check_sizes(image.size(), sino.size(), g);
    for (int row = 0; row < g.num_angles; ++row)
        project_row(image, sino.data() + static_cast<std::size_t>(row) * g.num_detectors, g, row);
}

template <class T>
void back_project(std::span<const T> sino, std::span<T> image, const FanBeamGeometry& g)
{
    check_sizes(image.size(), sino.size(), g);
    const std::size_t npix = image.size();
    const int blocks = std::min(kBackProjectBlocks, g.num_angles);
    std::vector<double> partial(static_cast<std::size_t>(blocks) * npix, 0.0);

#pragma omp parallel for schedule(dynamic, 1)
    for (int b = 0; b < blocks; ++b) {
        const int first = static_cast<int>(static_cast<std::int64_t>(g.num_angles) * b / blocks);
        const int last = static_cast<int>(static_cast<std::int64_t>(g.num_angles) * (b + 1) / blocks);
        double* acc = partial.data() + static_cast<std::size_t>(b) * npix;
        for (int row = first; row < last; ++row)
            smear_row(sino.data() + static_cast<std::size_t>(row) * g.num_detectors, acc, g, row);
    }

#pragma omp parallel for schedule(static)
    for (std::int64_t p = 0; p < static_cast<std::int64_t>(npix); ++p) {
        double s = 0.0;
        for (int b = 0; b < blocks; ++b)
            s += partial[static_cast<std::size_t>(b) * npix + p];
        image[p] = static_cast<T>(s);
    }
}

template <class T>
void back_project_serial(std::span<const T> sino, std::span<T> image, const FanBeamGeometry& g)
{
    check_sizes(image.size(), sino.size(), g);
    std::vector<double> acc(image.size(), 0.0);
    for (int row = 0; row < g.num_angles; ++row)
        smear_row(sino.data() + static_cast<std::size_t>(row) * g.num_detectors, acc.data(), g, row);
    for (std::size_t p = 0; p < acc.size(); ++p)
        image[p] = static_cast<T>(acc[p]);
}

template void forward_project<float>(std::span<const float>, std::span<float>, const FanBeamGeometry&);
template void forward_project<double>(std::span<const double>, std::span<double>, const FanBeamGeometry&);
template void back_project<float>(std::span<const float>, std::span<float>, const FanBeamGeometry&);
template void back_project<double>(std::span<const double>, std::span<double>, const FanBeamGeometry&);
template void forward_project_serial<float>(std::span<const float>, std::span<float>, const FanBeamGeometry&);
template void forward_project_serial<double>(std::span<const double>, std::span<double>, const FanBeamGeometry&);
template void back_project_serial<float>(std::span<const float>, std::span<float>, const FanBeamGeometry&);
template void back_project_serial<double>(std::span<const double>, std::span<double>, const FanBeamGeometry&);

Sinogram forward_project(const Image& image, const FanBeamGeometry& g)
{
    if (image.size != g.image_size)
        throw GeometryError("image is " + std::to_string(image.size) + " px, geometry expects " +
                            std::to_string(g.image_size));
    Sinogram out(g);
    forward_project<float>(image.values, out.values, g);
    return out;
}

Image back_project(const Sinogram& sino, const FanBeamGeometry& g)
{
    if (sino.num_angles() != g.num_angles || sino.num_detectors() != g.num_detectors)
        throw GeometryError("sinogram dimensions do not match geometry");
    Image out(g.image_size, Provenance::reconstruction);
    back_project<float>(sino.values, out.values, g);
    return out;
}

Sinogram slice_angles(const Sinogram& sino, double first_deg, double last_deg)
{
    const FanBeamGeometry& g = sino.geometry;
    const double kf = (first_deg - g.angle_start_deg) / g.angle_step_deg;
    const double kl = (last_deg - g.angle_start_deg) / g.angle_step_deg;
    if (std::abs(kf - std::round(kf)) > 1e-9 || std::abs(kl - std::round(kl)) > 1e-9)
        throw UsageError("window ends are not on the sinogram angle grid");
    const auto first = static_cast<int>(std::lround(kf));
    const auto last = static_cast<int>(std::lround(kl));
    if (first < 0 || last >= g.num_angles || last < first)
        throw UsageError("window lies outside the sinogram angle grid");

    Sinogram out(g.with_angles(g.angle_deg(first), g.angle_step_deg, last - first + 1));
    const auto nd = static_cast<std::size_t>(g.num_detectors);
    std::copy(sino.values.begin() + first * nd, sino.values.begin() + (last + 1) * nd, out.values.begin());
    return out;
}

Sinogram extract_window(const Sinogram& sino, const AngularWindow& w)
{
    w.validate(sino.geometry.angle_step_deg);
    return slice_angles(sino, w.alpha_deg, w.beta_deg);
}

Sinogram add_noise(const Sinogram& sino, double sigma, std::uint64_t seed)
{
    if (!(sigma >= 0.0))
        throw UsageError("noise sigma must be non-negative");
    Sinogram out = sino;
    if (sigma == 0.0)
        return out;
    Rng rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);
    for (float& v : out.values)
        v = static_cast<float>(v + noise(rng));
    return out;
}

} // namespace lact
