#include "lact/phantom.hpp"

#include "lact/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lact::phantom {

double smoothstep(double d, double e1, double e2)
{
    if (!(e1 < e2))
        throw UsageError("smoothstep requires e1 < e2");
    if (d <= e1)
        return 0.0;
    if (d >= e2)
        return 1.0;
    const double t = (d - e1) / (e2 - e1);
    return 3.0 * t * t - 2.0 * t * t * t;
}

double brightness(double d, const std::array<double, 4>& c)
{
    return c[0] + d * (c[1] + d * (c[2] + d * c[3]));
}

namespace {

constexpr std::array<const char*, 7> kKindNames{"circle",  "ellipse", "rounded_rectangle", "rounded_triangle",
                                                "capsule", "cross",   "blob"};

double length(double x, double y)
{
    return std::hypot(x, y);
}

// Rounded box with half extents (bx, by) and corner radius r.
double sd_round_box(double x, double y, double bx, double by, double r)
{
    const double qx = std::abs(x) - bx + r;
    const double qy = std::abs(y) - by + r;
    return length(std::max(qx, 0.0), std::max(qy, 0.0)) + std::min(std::max(qx, qy), 0.0) - r;
}

// Equilateral triangle with circumradius-like size 1, shrunk by r then rounded.
double sd_round_triangle(double x, double y, double r)
{
    const double k = std::sqrt(3.0);
    const double s = 1.0 - r;
    x = std::abs(x) - s;
    y = y + s / k;
    if (x + k * y > 0.0) {
        const double nx = (x - k * y) / 2.0;
        const double ny = (-k * x - y) / 2.0;
        x = nx;
        y = ny;
    }
    x -= std::clamp(x, -2.0 * s, 0.0);
    return -length(x, y) * (y < 0.0 ? -1.0 : 1.0) - r;
}

double sd_capsule(double x, double y, double half_len, double r)
{
    const double px = x - std::clamp(x, -half_len, half_len);
    return length(px, y) - r;
}

double sd_local(const Shape& s, double x, double y)
{
    const auto& p = s.params;
    switch (s.kind) {
    case ShapeKind::circle:
        return length(x, y) - 1.0;
    case ShapeKind::ellipse: {
        // p[0]: minor/major axis ratio. Scaled-circle approximation.
        const double b = p[0];
        return (length(x, y / b) - 1.0) * b;
    }
    case ShapeKind::rounded_rectangle:
        // p[0]: half height relative to half width, p[1]: corner radius.
        return sd_round_box(x, y, 1.0, p[0], std::min(p[1], p[0]));
    case ShapeKind::rounded_triangle:
        return sd_round_triangle(x, y, p[0]);
    case ShapeKind::capsule:
        // p[0]: cap radius; total half length is 1.
        return sd_capsule(x, y, 1.0 - p[0], p[0]);
    case ShapeKind::cross: {
        // p[0]: arm half width, p[1]: corner radius.
        const double w = p[0];
        const double r = std::min(p[1], w);
        return std::min(sd_round_box(x, y, 1.0, w, r), sd_round_box(x, y, w, 1.0, r));
    }
    case ShapeKind::blob: {
        // r(theta) = 1 + p0 cos(2 theta + p1) + p2 cos(3 theta + p3)
        const double theta = std::atan2(y, x);
        const double rr = 1.0 + p[0] * std::cos(2 * theta + p[1]) + p[2] * std::cos(3 * theta + p[3]);
        return length(x, y) - rr;
    }
    }
    return 0.0;
}

} // namespace

std::string to_string(ShapeKind kind)
{
    return kKindNames[static_cast<std::size_t>(kind)];
}

ShapeKind shape_kind_from_string(const std::string& name)
{
    for (std::size_t i = 0; i < kKindNames.size(); ++i)
        if (name == kKindNames[i])
            return static_cast<ShapeKind>(i);
    throw UsageError("unknown shape kind '" + name + "'");
}

double signed_distance(const Shape& s, double cx, double cy, double x, double y)
{
    const double t = s.rotation_deg * std::numbers::pi / 180.0;
    const double c = std::cos(t), sn = std::sin(t);
    const double dx = x - (cx + s.tx);
    const double dy = y - (cy + s.ty);
    const double lx = (c * dx + sn * dy) / s.scale;
    const double ly = (-sn * dx + c * dy) / s.scale;
    return sd_local(s, lx, ly) * s.scale;
}

Image render_disk(const PhantomSpec& spec, int size)
{
    if (size <= 0)
        throw UsageError("image size must be positive");
    if (!(spec.radius > 0.0))
        throw UsageError("disk radius must be positive");
    if (!(spec.e1 < spec.e2))
        throw UsageError("disk edge requires e1 < e2");
    const double w = spec.edge_width();
    if (spec.cx - spec.radius < -0.5 || spec.cy - spec.radius < -0.5 || spec.cx + spec.radius > size - 0.5 ||
        spec.cy + spec.radius > size - 0.5)
        throw GeometryError("disk exceeds image bounds");

    Image img(size);
    for (int r = 0; r < size; ++r) {
        for (int c = 0; c < size; ++c) {
            const double d = std::hypot(c - spec.cx, r - spec.cy);
            if (d >= spec.radius)
                continue;
            const double b = std::clamp(brightness(d, spec.brightness_coeffs), 0.0, kMaxValue);
            const double fade = 1.0 - smoothstep(d, spec.radius - w, spec.radius);
            img.at(r, c) = static_cast<float>(b * fade);
        }
    }
    return img;
}

namespace {

// Marks every pixel within `dist` (center to center) of any stencil pixel.
void stamp_dilated(std::vector<std::uint8_t>& blocked, int size, const std::vector<std::int32_t>& stencil, double dist)
{
    const int reach = static_cast<int>(std::ceil(dist));
    const double d2 = dist * dist;
    for (std::int32_t p : stencil) {
        const int r0 = p / size, c0 = p % size;
        for (int dr = -reach; dr <= reach; ++dr) {
            const int r = r0 + dr;
            if (r < 0 || r >= size)
                continue;
            for (int dc = -reach; dc <= reach; ++dc) {
                const int c = c0 + dc;
                if (c < 0 || c >= size)
                    continue;
                if (dr * dr + dc * dc < d2)
                    blocked[static_cast<std::size_t>(r) * size + c] = 1;
            }
        }
    }
}

} // namespace

Image place_shapes(const Image& disk, const PhantomSpec& spec, Rng& rng, PlacementReport* report)
{
    const auto* fill = std::get_if<ShapesFill>(&spec.fill);
    if (!fill)
        throw UsageError("place_shapes requires a Shapes fill");
    Image out = disk;
    if (fill->shapes.empty())
        return out;

    const int n = disk.size;
    const double band = spec.edge_width();
    const double sep = fill->min_separation;
    // Shape pixels must stay this far from the disk center.
    const double max_center_dist = spec.radius - band - sep;
    std::vector<std::uint8_t> blocked(disk.pixel_count(), 0);
    PlacementReport local;

    for (const Shape& proto : fill->shapes) {
        bool accepted = false;
        const double reach = std::max(0.0, max_center_dist - proto.scale * 0.5);
        for (int attempt = 0; attempt < kMaxPlacementAttempts && !accepted; ++attempt) {
            Shape s = proto;
            // Uniform in the disk of admissible centers.
            const double rr = reach * std::sqrt(uniform(rng, 0.0, 1.0));
            const double th = uniform(rng, 0.0, 2.0 * std::numbers::pi);
            s.tx = rr * std::cos(th);
            s.ty = rr * std::sin(th);

            const double ext = 2.0 * s.scale + 2.0;
            const int r_lo = std::max(0, static_cast<int>(std::floor(spec.cy + s.ty - ext)));
            const int r_hi = std::min(n - 1, static_cast<int>(std::ceil(spec.cy + s.ty + ext)));
            const int c_lo = std::max(0, static_cast<int>(std::floor(spec.cx + s.tx - ext)));
            const int c_hi = std::min(n - 1, static_cast<int>(std::ceil(spec.cx + s.tx + ext)));

            std::vector<std::int32_t> stencil;
            bool ok = true;
            for (int r = r_lo; r <= r_hi && ok; ++r) {
                for (int c = c_lo; c <= c_hi; ++c) {
                    if (signed_distance(s, spec.cx, spec.cy, c, r) >= 0.0)
                        continue;
                    const std::size_t idx = static_cast<std::size_t>(r) * n + c;
                    if (blocked[idx] || std::hypot(c - spec.cx, r - spec.cy) > max_center_dist) {
                        ok = false;
                        break;
                    }
                    stencil.push_back(static_cast<std::int32_t>(idx));
                }
            }
            if (!ok || stencil.empty())
                continue;

            accepted = true;
            stamp_dilated(blocked, n, stencil, sep);
            for (int r = r_lo; r <= r_hi; ++r) {
                for (int c = c_lo; c <= c_hi; ++c) {
                    const double sd = signed_distance(s, spec.cx, spec.cy, c, r);
                    if (sd < 0.0)
                        out.at(r, c) = static_cast<float>(out.at(r, c) * smoothstep(sd, -band, 0.0));
                }
            }
            local.placed.push_back(s);
            local.stencils.push_back(std::move(stencil));
        }
        if (!accepted)
            ++local.skipped;
    }
    if (report)
        *report = std::move(local);
    return out;
}

Image voronoi_fill(const Image& disk, const PhantomSpec& spec)
{
    const auto* fill = std::get_if<VoronoiFill>(&spec.fill);
    if (!fill)
        throw UsageError("voronoi_fill requires a Voronoi fill");
    if (fill->num_seeds < 2 || static_cast<int>(fill->seed_points.size()) < 2)
        throw UsageError("Voronoi fill needs at least two seeds");
    if (!(fill->corner_smoothing > 0.0))
        throw UsageError("corner smoothing must be positive");

    Image out = disk;
    const int n = disk.size;
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            double d1 = std::numeric_limits<double>::infinity();
            double d2 = d1;
            for (const auto& s : fill->seed_points) {
                const double d = std::hypot(c - s[0], r - s[1]);
                if (d < d1) {
                    d2 = d1;
                    d1 = d;
                } else if (d < d2) {
                    d2 = d;
                }
            }
            const double wall =
                smoothstep(d2 - d1, fill->border_radius, fill->border_radius + fill->corner_smoothing);
            out.at(r, c) = static_cast<float>(out.at(r, c) * wall);
        }
    }
    return out;
}

Image render_phantom(const PhantomSpec& spec, int size, PlacementReport* report)
{
    Image disk = render_disk(spec, size);
    if (std::holds_alternative<ShapesFill>(spec.fill)) {
        Rng rng(spec.rng_seed);
        return place_shapes(disk, spec, rng, report);
    }
    if (std::holds_alternative<VoronoiFill>(spec.fill))
        return voronoi_fill(disk, spec);
    return disk;
}

} // namespace lact::phantom
