#include "lact/errors.hpp"
#include "lact/io.hpp"
#include "lact/json_io.hpp"
#include "lact/phantom.hpp"
#include "lact/projector.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <numbers>

namespace lact::phantom {

namespace {

enum SeedRole : std::uint64_t { kSpecRole = 1, kPlacementRole = 2, kNoiseRole = 3 };

void check_range(const Range& r, const char* name, bool positive = false)
{
    if (!(r.lo <= r.hi) || (positive && !(r.lo > 0.0)))
        throw UsageError(std::string("manifest range '") + name + "' is invalid");
}

Shape draw_shape(Rng& rng, ShapeKind kind, double scale, double rotation)
{
    Shape s;
    s.kind = kind;
    s.scale = scale;
    s.rotation_deg = rotation;
    switch (kind) {
    case ShapeKind::circle:
        break;
    case ShapeKind::ellipse:
        s.params[0] = uniform(rng, 0.45, 0.9);
        break;
    case ShapeKind::rounded_rectangle:
        s.params[0] = uniform(rng, 0.4, 1.0);
        s.params[1] = uniform(rng, 0.15, 0.4);
        break;
    case ShapeKind::rounded_triangle:
        s.params[0] = uniform(rng, 0.15, 0.35);
        break;
    case ShapeKind::capsule:
        s.params[0] = uniform(rng, 0.3, 0.6);
        break;
    case ShapeKind::cross:
        s.params[0] = uniform(rng, 0.25, 0.4);
        s.params[1] = uniform(rng, 0.05, 0.2);
        break;
    case ShapeKind::blob:
        s.params[0] = uniform(rng, 0.0, 0.25);
        s.params[1] = uniform(rng, 0.0, 2.0 * std::numbers::pi);
        s.params[2] = uniform(rng, 0.0, 0.15);
        s.params[3] = uniform(rng, 0.0, 2.0 * std::numbers::pi);
        break;
    }
    return s;
}

} // namespace

DatasetManifest DatasetManifest::desk_small()
{
    DatasetManifest m;
    m.geometry = FanBeamGeometry::desk_small();
    m.translation_px = 5.0;
    m.edge_width_px = {1.0, 2.5};
    m.separation_px = {1.0, 2.5};
    m.border_radius_px = {0.6, 1.2};
    m.corner_smoothing_px = {0.4, 1.5};
    m.max_seeds = 10;
    return m;
}

void DatasetManifest::validate() const
{
    if (count <= 0)
        throw UsageError("manifest count must be positive");
    if (fraction_shapes < 0.0 || fraction_voronoi < 0.0 || std::abs(fraction_shapes + fraction_voronoi - 1.0) > 1e-9)
        throw UsageError("manifest fractions must be non-negative and sum to 1");
    geometry.validate();
    check_range(radius_frac, "radius_frac", true);
    check_range(c0, "c0");
    check_range(rim_brightness, "rim_brightness");
    check_range(c3_rel, "c3_rel");
    check_range(edge_width_px, "edge_width_px", true);
    check_range(separation_px, "separation_px");
    check_range(shape_scale_frac, "shape_scale_frac", true);
    check_range(border_radius_px, "border_radius_px");
    check_range(corner_smoothing_px, "corner_smoothing_px", true);
    if (translation_px < 0.0 || noise_sigma < 0.0)
        throw UsageError("translation and noise must be non-negative");
    if (min_shapes < 0 || max_shapes < min_shapes || min_seeds < 2 || max_seeds < min_seeds)
        throw UsageError("manifest count ranges are invalid");
    if (kinds.empty() || kinds.size() != kind_weights.size())
        throw UsageError("manifest kinds and kind_weights must be non-empty and of equal length");
    const double n = image_size();
    const double worst = radius_frac.hi * n + translation_px;
    if (worst > 0.5 * n - 0.5)
        throw UsageError("largest disk plus translation exceeds the image");
}

bool is_voronoi_sample(const DatasetManifest& m, int index)
{
    constexpr double eps = 1e-9;
    return std::floor((index + 1) * m.fraction_voronoi + eps) > std::floor(index * m.fraction_voronoi + eps);
}

PhantomSpec sample_spec(const DatasetManifest& m, int index)
{
    Rng rng(derive_seed(m.master_seed, kSpecRole, static_cast<std::uint64_t>(index)));
    const int n = m.image_size();
    PhantomSpec spec;
    spec.radius = uniform(rng, m.radius_frac.lo, m.radius_frac.hi) * n;
    spec.cx = 0.5 * (n - 1) + uniform(rng, -m.translation_px, m.translation_px);
    spec.cy = 0.5 * (n - 1) + uniform(rng, -m.translation_px, m.translation_px);

    const double r = spec.radius;
    const double c0 = uniform(rng, m.c0.lo, m.c0.hi);
    const double rim = uniform(rng, m.rim_brightness.lo, m.rim_brightness.hi);
    const double c3r = uniform(rng, m.c3_rel.lo, m.c3_rel.hi);
    spec.brightness_coeffs = {c0, 0.0, (rim - c0 - c3r) / (r * r), c3r / (r * r * r)};
    spec.e1 = 0.0;
    spec.e2 = uniform(rng, m.edge_width_px.lo, m.edge_width_px.hi);
    spec.rng_seed = derive_seed(m.master_seed, kPlacementRole, static_cast<std::uint64_t>(index));

    if (is_voronoi_sample(m, index)) {
        VoronoiFill v;
        v.num_seeds = uniform_int(rng, m.min_seeds, m.max_seeds);
        for (int i = 0; i < v.num_seeds; ++i) {
            const double rr = r * std::sqrt(uniform(rng, 0.0, 1.0));
            const double th = uniform(rng, 0.0, 2.0 * std::numbers::pi);
            v.seed_points.push_back({spec.cx + rr * std::cos(th), spec.cy + rr * std::sin(th)});
        }
        v.border_radius = uniform(rng, m.border_radius_px.lo, m.border_radius_px.hi);
        v.corner_smoothing = uniform(rng, m.corner_smoothing_px.lo, m.corner_smoothing_px.hi);
        spec.fill = std::move(v);
        return spec;
    }

    ShapesFill f;
    f.min_separation = uniform(rng, m.separation_px.lo, m.separation_px.hi);
    const int count = uniform_int(rng, m.min_shapes, m.max_shapes);
    const bool varied = uniform(rng, 0.0, 1.0) < m.varied_fraction;
    std::discrete_distribution<int> pick(m.kind_weights.begin(), m.kind_weights.end());
    const ShapeKind common_kind = m.kinds[static_cast<std::size_t>(pick(rng))];
    const double common_scale = uniform(rng, m.shape_scale_frac.lo, m.shape_scale_frac.hi) * n;
    for (int i = 0; i < count; ++i) {
        if (varied) {
            const ShapeKind kind = m.kinds[static_cast<std::size_t>(pick(rng))];
            const double scale = uniform(rng, m.shape_scale_frac.lo, m.shape_scale_frac.hi) * n;
            f.shapes.push_back(draw_shape(rng, kind, scale, uniform(rng, 0.0, 360.0)));
        } else {
            f.shapes.push_back(draw_shape(rng, common_kind, common_scale, 0.0));
        }
    }
    spec.fill = std::move(f);
    return spec;
}

std::string sample_name(int index, const char* ext)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "sample_%06d.%s", index, ext);
    return buf;
}

void generate_dataset(const DatasetManifest& m, const std::filesystem::path& dir)
{
    m.validate();
    std::filesystem::create_directories(dir);
    write_json_file(dir / "manifest.json", to_json(m));

    const int n = m.image_size();
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < m.count; ++i) {
        try {
            const PhantomSpec spec = sample_spec(m, i);
            const Image img = render_phantom(spec, n);
            io::write_image(dir / sample_name(i, "laim"), img);
            if (m.write_sinograms) {
                Sinogram s = forward_project(img, m.geometry);
                if (m.noise_sigma > 0.0)
                    s = add_noise(s, m.noise_sigma,
                                  derive_seed(m.master_seed, kNoiseRole, static_cast<std::uint64_t>(i)));
                io::write_sinogram(dir / sample_name(i, "lasg"), s);
            }
        } catch (...) {
#pragma omp critical(lact_dataset_failure)
            if (!failure)
                failure = std::current_exception();
        }
    }
    if (failure)
        std::rethrow_exception(failure);
}

} // namespace lact::phantom
