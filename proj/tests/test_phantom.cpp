#include "support.hpp"

#include "lact/errors.hpp"
#include "lact/io.hpp"
#include "lact/json_io.hpp"
#include "lact/phantom.hpp"

#include <doctest.h>

#include <fstream>
#include <iterator>

using namespace lact;
using namespace lact::phantom;

namespace {

PhantomSpec centered_disk(int n, double radius, double e2)
{
    PhantomSpec s;
    s.cx = s.cy = 0.5 * (n - 1);
    s.radius = radius;
    s.e1 = 0.0;
    s.e2 = e2;
    s.brightness_coeffs = {0.8, 0.0, 0.2 / (radius * radius), 0.0};
    return s;
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& p)
{
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), {}};
}

} // namespace

TEST_CASE("smoothstep values and edges")
{
    CHECK(smoothstep(-5, 0, 1) == 0.0);
    CHECK(smoothstep(0.5, 0, 1) == 0.5);
    CHECK(smoothstep(0.25, 0, 1) == doctest::Approx(0.15625).epsilon(1e-15));
    CHECK(smoothstep(2, 0, 1) == 1.0);
    CHECK_THROWS_AS(smoothstep(0, 1, 1), UsageError);

    double prev = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        const double v = smoothstep(-0.5 + 2e-3 * i, 0, 1);
        CHECK(v >= prev);
        prev = v;
    }
    const double h = 1e-6;
    CHECK(std::abs(smoothstep(h, 0, 1) - smoothstep(0, 0, 1)) / h < 1e-3);
    CHECK(std::abs(smoothstep(1, 0, 1) - smoothstep(1 - h, 0, 1)) / h < 1e-3);
}

TEST_CASE("brightness polynomial")
{
    const double r = 20.0;
    CHECK(brightness(0, {0.7, 1, 2, 3}) == 0.7);
    CHECK(brightness(5, {1, 0, 0, 0}) == 1.0);
    CHECK(brightness(r, {0.8, 0, 0.2 / (r * r), 0}) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("render_disk")
{
    const int n = 64;
    const auto spec = centered_disk(n, 20.0, 3.0);
    const Image img = render_disk(spec, n);
    CHECK(img.at(31, 31) == doctest::Approx(brightness(std::hypot(0.5, 0.5), spec.brightness_coeffs)).epsilon(1e-6));
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            const double d = std::hypot(c - spec.cx, r - spec.cy);
            const float v = img.at(r, c);
            CHECK(v >= 0.0f);
            CHECK(v <= kMaxValue);
            if (d >= spec.radius)
                CHECK(v == 0.0f);
        }

    // Radial profile decreases monotonically across the fade band.
    PhantomSpec flat = spec;
    flat.brightness_coeffs = {1, 0, 0, 0};
    flat.cx = flat.cy = 32.0;
    const Image f = render_disk(flat, n);
    for (int c = 32 + 17; c < 32 + 21; ++c)
        CHECK(f.at(32, c + 1) <= f.at(32, c));

    auto off = spec;
    off.cx = 5.0;
    CHECK_THROWS_AS(render_disk(off, n), GeometryError);
    auto bad = spec;
    bad.e2 = bad.e1;
    CHECK_THROWS_AS(render_disk(bad, n), UsageError);

    CHECK(render_disk(spec, n).values == img.values);
}

TEST_CASE("place_shapes")
{
    const int n = 64;
    auto spec = centered_disk(n, 24.0, 2.0);
    const Image disk = render_disk(spec, n);

    spec.fill = ShapesFill{};
    Rng rng(1);
    CHECK(place_shapes(disk, spec, rng).values == disk.values);

    // A single circle hole: its interior (beyond the soft band) is air.
    ShapesFill one;
    Shape circle;
    circle.scale = 6.0;
    one.shapes.push_back(circle);
    spec.fill = one;
    PlacementReport rep;
    const Image holed = place_shapes(disk, spec, rng, &rep);
    REQUIRE(rep.placed.size() == 1);
    const double hx = spec.cx + rep.placed[0].tx, hy = spec.cy + rep.placed[0].ty;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            if (std::hypot(c - hx, r - hy) < circle.scale - spec.edge_width())
                CHECK(holed.at(r, c) == 0.0f);
}

TEST_CASE("generated samples keep shapes separated")
{
    auto m = DatasetManifest::desk_small();
    m.master_seed = 5;
    m.min_shapes = 3;
    for (int i = 0; i < 40; ++i) {
        const PhantomSpec spec = sample_spec(m, i);
        const auto* fill = std::get_if<ShapesFill>(&spec.fill);
        if (!fill)
            continue;
        PlacementReport rep;
        render_phantom(spec, m.image_size(), &rep);
        const int n = m.image_size();
        for (std::size_t a = 0; a < rep.stencils.size(); ++a)
            for (std::size_t b = a + 1; b < rep.stencils.size(); ++b)
                for (auto pa : rep.stencils[a])
                    for (auto pb : rep.stencils[b]) {
                        const double d = std::hypot(pa % n - pb % n, pa / n - pb / n);
                        CHECK(d >= fill->min_separation);
                    }
        for (const auto& st : rep.stencils)
            for (auto p : st)
                CHECK(std::hypot(p % n - spec.cx, p / n - spec.cy) <=
                      spec.radius - spec.edge_width() - fill->min_separation);
    }
}

TEST_CASE("voronoi_fill")
{
    const int n = 64;
    auto spec = centered_disk(n, 24.0, 2.0);
    spec.brightness_coeffs = {1, 0, 0, 0};
    const Image disk = render_disk(spec, n);
    VoronoiFill v;
    v.num_seeds = 2;
    v.seed_points = {{{20.0, 31.5}}, {{43.0, 31.5}}};  // bisector is the column x = 31.5
    v.border_radius = 1.0;
    v.corner_smoothing = 1.0;
    spec.fill = v;
    const Image out = voronoi_fill(disk, spec);
    for (int r = 20; r < 44; ++r) {
        // d2 - d1 = 2|x - 31.5|: columns 31 and 32 lie on the wall.
        CHECK(out.at(r, 31) == 0.0f);
        CHECK(out.at(r, 32) == 0.0f);
        CHECK(out.at(r, 26) == disk.at(r, 26));
        CHECK(out.at(r, 37) == disk.at(r, 37));
    }
    v.num_seeds = 1;
    v.seed_points.resize(1);
    spec.fill = v;
    CHECK_THROWS_AS(voronoi_fill(disk, spec), UsageError);
}

TEST_CASE("dataset split, ranges and determinism")
{
    DatasetManifest m = DatasetManifest::desk_small();
    m.count = 10;
    int vor = 0;
    for (int i = 0; i < m.count; ++i)
        vor += is_voronoi_sample(m, i);
    CHECK(vor == 2);

    m.count = 1000;
    m.geometry = FanBeamGeometry::desk();
    m.translation_px = 10.0;
    m.radius_frac = {0.28, 0.34};
    double lo = 1e9, hi = -1e9;
    for (int i = 0; i < m.count; ++i) {
        const auto s = sample_spec(m, i);
        const double tx = s.cx - 0.5 * (m.image_size() - 1);
        lo = std::min(lo, tx);
        hi = std::max(hi, tx);
        CHECK(std::abs(tx) <= 10.0);
    }
    CHECK(lo < -9.0);
    CHECK(hi > 9.0);

    DatasetManifest small = DatasetManifest::desk_small();
    small.count = 10;
    small.master_seed = 42;
    const auto a = test::scratch_dir("gen_a"), b = test::scratch_dir("gen_b");
    generate_dataset(small, a);
    generate_dataset(small, b);
    int files = 0;
    for (const auto& e : std::filesystem::directory_iterator(a)) {
        CHECK(slurp(e.path()) == slurp(b / e.path().filename()));
        ++files;
    }
    CHECK(files == 21);
    for (int i = 0; i < small.count; ++i) {
        const Image img = io::read_image(a / sample_name(i, "laim"));
        for (float v : img.values) {
            CHECK(v >= 0.0f);
            CHECK(v <= kMaxValue);
        }
    }
    const auto round = manifest_from_json(read_json_file(a / "manifest.json"));
    CHECK(to_json(round) == to_json(small));
}

TEST_CASE("manifest validation")
{
    auto m = DatasetManifest::desk_small();
    m.fraction_voronoi = 0.5;
    CHECK_THROWS_AS(m.validate(), UsageError);
    m = DatasetManifest::desk_small();
    m.translation_px = 40;
    CHECK_THROWS_AS(m.validate(), UsageError);
    CHECK_THROWS_AS(manifest_from_json(Json{{"preset", "nope"}}), UsageError);
    CHECK_THROWS_AS(manifest_from_json(Json{{"bogus_key", 1}}), UsageError);
}
