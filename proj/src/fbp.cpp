#include "lact/fbp.hpp"

#include "lact/errors.hpp"
#include "lact/projector.hpp"

#include <fftw3.h>

#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>

namespace lact::fbp {

namespace {

// FFTW planning is not thread-safe; execution with the new-array API is.
std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

int next_pow2(int v)
{
    int p = 1;
    while (p < v)
        p <<= 1;
    return p;
}

struct FftBuffers {
    explicit FftBuffers(int n)
        : real(static_cast<double*>(fftw_malloc(sizeof(double) * n))),
          spec(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1))))
    {
    }
    ~FftBuffers()
    {
        fftw_free(real);
        fftw_free(spec);
    }
    FftBuffers(const FftBuffers&) = delete;
    FftBuffers& operator=(const FftBuffers&) = delete;

    double* real;
    fftw_complex* spec;
};

// Applies the real gains `response` to `buf.real` (length n) in place.
void filter_circular(FftBuffers& buf, int n, const std::vector<double>& response)
{
    fftw_plan fwd, inv;
    {
        std::lock_guard lock(planner_mutex());
        fwd = fftw_plan_dft_r2c_1d(n, buf.real, buf.spec, FFTW_ESTIMATE);
        inv = fftw_plan_dft_c2r_1d(n, buf.spec, buf.real, FFTW_ESTIMATE);
    }
    fftw_execute(fwd);
    for (int f = 0; f <= n / 2; ++f) {
        buf.spec[f][0] *= response[f] / n;
        buf.spec[f][1] *= response[f] / n;
    }
    fftw_execute(inv);
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
}

} // namespace

void FilterSpec::validate() const
{
    if (!(cutoff > 0.0 && cutoff <= 1.0))
        throw UsageError("filter cutoff must lie in (0, 1]");
}

FilterKind filter_kind_from_string(const std::string& name)
{
    if (name == "ram-lak" || name == "ramlak")
        return FilterKind::ram_lak;
    if (name == "hann")
        return FilterKind::hann;
    throw UsageError("unknown filter '" + name + "' (use ram-lak or hann)");
}

double ramlak_tap(int k, double delta)
{
    if (k == 0)
        return 1.0 / (4.0 * delta * delta);
    if (k % 2 == 0)
        return 0.0;
    return -1.0 / (static_cast<double>(k) * k * std::numbers::pi * std::numbers::pi * delta * delta);
}

RampFilter::RampFilter(int row_length, double delta, const FilterSpec& spec)
    : n_(row_length), padded_(next_pow2(2 * row_length))
{
    if (row_length < 2)
        throw UsageError("ramp filtering needs at least two detector cells");
    spec.validate();

    // Spatial kernel wrapped onto the padded circle, then transformed.
    FftBuffers buf(padded_);
    for (int i = 0; i < padded_; ++i) {
        const int k = i <= padded_ / 2 ? i : i - padded_;
        buf.real[i] = ramlak_tap(k, delta);
    }
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_r2c_1d(padded_, buf.real, buf.spec, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }

    response_.resize(padded_ / 2 + 1);
    for (int f = 0; f <= padded_ / 2; ++f) {
        const double nu = static_cast<double>(f) / padded_ * 2.0;  // fraction of Nyquist
        double gain = buf.spec[f][0];  // kernel is even, transform is real
        if (nu > spec.cutoff)
            gain = 0.0;
        else if (spec.kind == FilterKind::hann)
            gain *= 0.5 * (1.0 + std::cos(std::numbers::pi * nu / spec.cutoff));
        response_[f] = gain;
    }
    response_[0] = 0.0;
}

std::vector<double> RampFilter::apply_padded(const std::vector<double>& row) const
{
    if (static_cast<int>(row.size()) != n_)
        throw ShapeError("row length does not match the filter");
    FftBuffers buf(padded_);
    std::fill(buf.real, buf.real + padded_, 0.0);
    std::copy(row.begin(), row.end(), buf.real);
    filter_circular(buf, padded_, response_);
    return {buf.real, buf.real + padded_};
}

void RampFilter::apply(std::vector<double>& row) const
{
    std::vector<double> full = apply_padded(row);
    std::copy(full.begin(), full.begin() + n_, row.begin());
}

Sinogram ramp_filter_rows(const Sinogram& sino, const FilterSpec& filter)
{
    const int nd = sino.num_detectors();
    const RampFilter ramp(nd, sino.geometry.detector_pixel_size, filter);
    Sinogram out = sino;
#pragma omp parallel for schedule(static)
    for (int r = 0; r < sino.num_angles(); ++r) {
        std::vector<double> row(static_cast<std::size_t>(nd));
        for (int k = 0; k < nd; ++k)
            row[k] = sino.at(r, k);
        ramp.apply(row);
        for (int k = 0; k < nd; ++k)
            out.at(r, k) = static_cast<float>(row[k]);
    }
    return out;
}

namespace {

void backproject_rows(const Sinogram& q, double angle_weight, Image& out, int row_begin, int row_end)
{
    const FanBeamGeometry& g = q.geometry;
    const int n = g.image_size;
    const int nd = g.num_detectors;
    const double ps = g.image_pixel_size;
    const double sod = g.source_to_center;
    const double mag = g.source_to_detector() / sod;
    const double center_det = 0.5 * (nd - 1);

    std::vector<double> cs(static_cast<std::size_t>(g.num_angles)), sn(cs.size());
    for (int a = 0; a < g.num_angles; ++a) {
        const double t = g.angle_deg(a) * std::numbers::pi / 180.0;
        cs[a] = std::cos(t);
        sn[a] = std::sin(t);
    }

    for (int r = row_begin; r < row_end; ++r) {
        const double y = (0.5 * (n - 1) - r) * ps;
        for (int c = 0; c < n; ++c) {
            const double x = (c - 0.5 * (n - 1)) * ps;
            double acc = 0.0;
            for (int a = 0; a < g.num_angles; ++a) {
                const double along = sod - (x * cs[a] + y * sn[a]);   // source to pixel, along the axis
                const double lateral = -x * sn[a] + y * cs[a];
                const double u = sod * lateral / along;               // virtual detector coordinate
                const double pos = u * mag / g.detector_pixel_size + center_det;
                const int k0 = static_cast<int>(std::floor(pos));
                if (k0 < -1 || k0 >= nd)
                    continue;
                const double f = pos - k0;
                const double v0 = k0 >= 0 ? q.at(a, k0) : 0.0;
                const double v1 = k0 + 1 < nd ? q.at(a, k0 + 1) : 0.0;
                const double uu = along / sod;
                acc += ((1.0 - f) * v0 + f * v1) / (uu * uu);
            }
            out.at(r, c) = static_cast<float>(acc * angle_weight);
        }
    }
}

} // namespace

Image fbp_backproject_serial(const Sinogram& filtered, double angle_weight)
{
    Image out(filtered.geometry.image_size, Provenance::reconstruction);
    backproject_rows(filtered, angle_weight, out, 0, out.size);
    return out;
}

Image fbp_backproject(const Sinogram& filtered, double angle_weight)
{
    Image out(filtered.geometry.image_size, Provenance::reconstruction);
#pragma omp parallel for schedule(dynamic, 1)
    for (int r = 0; r < out.size; ++r)
        backproject_rows(filtered, angle_weight, out, r, r + 1);
    return out;
}

Image fbp_reconstruct(const Sinogram& sino, const FanBeamGeometry& geom, const FilterSpec& filter)
{
    const FanBeamGeometry& sg = sino.geometry;
    if (sino.num_detectors() != geom.num_detectors || sg.image_size != geom.image_size ||
        sino.values.size() != static_cast<std::size_t>(sg.num_angles) * sg.num_detectors)
        throw GeometryError("sinogram does not match the reconstruction geometry");
    FanBeamGeometry g = geom.with_angles(sg.angle_start_deg, sg.angle_step_deg, sg.num_angles);
    g.validate();

    // A scan that closes the circle repeats its first view; drop the repeat.
    int rows = g.num_angles;
    while (rows > 1 && (rows - 1) * g.angle_step_deg >= 360.0 - 1e-9)
        --rows;
    Sinogram weighted(g.with_angles(g.angle_start_deg, g.angle_step_deg, rows));

    const double sdd = g.source_to_detector();
    for (int a = 0; a < rows; ++a)
        for (int k = 0; k < g.num_detectors; ++k) {
            const double u = g.detector_offset(k);
            weighted.at(a, k) = static_cast<float>(sino.at(a, k) * sdd / std::sqrt(sdd * sdd + u * u));
        }

    Sinogram q = ramp_filter_rows(weighted, filter);
    // Ramp kernel rescaled from detector spacing to the virtual detector at
    // the isocenter, with the 1/2 of the full-circle fan formula.
    const double delta = g.detector_pixel_size;
    const double a_virtual = delta * g.source_to_center / sdd;
    const float scale = static_cast<float>(delta * delta / (2.0 * a_virtual));
    for (float& v : q.values)
        v *= scale;
    return fbp_backproject(q, g.angle_step_deg * std::numbers::pi / 180.0);
}

} // namespace lact::fbp
