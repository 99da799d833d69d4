#pragma once

#include "lact/geometry.hpp"
#include "lact/rng.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace lact::phantom {

/// Cubic Hermite ramp: 0 for d <= e1, 3t^2 - 2t^3 inside, 1 for d >= e2.
double smoothstep(double d, double e1, double e2);

/// Radial brightness c0 + c1 d + c2 d^2 + c3 d^3 (unclamped).
double brightness(double d, const std::array<double, 4>& coeffs);

inline constexpr double kMaxValue = 1.5;

enum class ShapeKind { circle, ellipse, rounded_rectangle, rounded_triangle, capsule, cross, blob };

std::string to_string(ShapeKind kind);
ShapeKind shape_kind_from_string(const std::string& name);

/// Parametric hole shape. `params` are dimensionless and interpreted per kind
/// in a unit frame; `scale` (pixels), `rotation_deg` and `tx, ty` (pixel
/// offset from the disk center) place it in the image.
struct Shape {
    ShapeKind kind = ShapeKind::circle;
    std::array<double, 4> params{};
    double scale = 1.0;
    double rotation_deg = 0.0;
    double tx = 0.0;
    double ty = 0.0;
};

/// Approximate signed distance in pixels from image point (x, y) to the
/// shape placed around disk center (cx, cy); negative inside.
double signed_distance(const Shape& shape, double cx, double cy, double x, double y);

struct ShapesFill {
    std::vector<Shape> shapes;   // candidates; translations are drawn by place_shapes
    double min_separation = 2.0; // pixels
};

struct VoronoiFill {
    int num_seeds = 0;
    std::vector<std::array<double, 2>> seed_points;  // image pixel coordinates (x = col, y = row)
    double border_radius = 1.0;
    double corner_smoothing = 1.0;
};

struct EmptyFill {};

using Fill = std::variant<EmptyFill, ShapesFill, VoronoiFill>;

/// Generative parameters of one disk. Coordinates are in pixels with pixel
/// (row, col) centered at (x = col, y = row).
struct PhantomSpec {
    double cx = 0.0;
    double cy = 0.0;
    double radius = 1.0;
    std::array<double, 4> brightness_coeffs{1.0, 0.0, 0.0, 0.0};
    double e1 = 0.0;
    double e2 = 2.0;
    Fill fill = EmptyFill{};
    std::uint64_t rng_seed = 0;

    double edge_width() const { return e2 - e1; }
};

/// Disk with clamped radial brightness and a smoothstep rim that fades to
/// zero across [radius - (e2 - e1), radius].
Image render_disk(const PhantomSpec& spec, int size);

struct PlacementReport {
    std::vector<Shape> placed;        // accepted shapes with their translations
    std::vector<std::vector<std::int32_t>> stencils;  // pixel indices of each accepted shape
    int skipped = 0;                  // shapes that found no free spot
};

inline constexpr int kMaxPlacementAttempts = 200;

/// Carves the candidate shapes of a ShapesFill into `disk` as soft holes,
/// rejecting positions that violate the separation constraints.
Image place_shapes(const Image& disk, const PhantomSpec& spec, Rng& rng, PlacementReport* report = nullptr);

/// Darkens Voronoi cell walls: factor smoothstep(d2 - d1, border, border + smoothing).
Image voronoi_fill(const Image& disk, const PhantomSpec& spec);

/// render_disk followed by the spec's fill.
Image render_phantom(const PhantomSpec& spec, int size, PlacementReport* report = nullptr);

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

/// Every randomized quantity of the synthetic distribution.
struct DatasetManifest {
    int version = 1;
    int count = 10;
    std::uint64_t master_seed = 0;
    double fraction_shapes = 0.8;
    double fraction_voronoi = 0.2;
    FanBeamGeometry geometry = FanBeamGeometry::desk();
    bool write_sinograms = true;
    double noise_sigma = 0.0;

    Range radius_frac{0.28, 0.34};      // disk radius / image size
    double translation_px = 10.0;       // |tx|, |ty| bound
    Range c0{0.7, 0.9};
    Range rim_brightness{0.95, 1.1};
    Range c3_rel{-0.05, 0.05};          // c3 * r^3
    Range edge_width_px{1.5, 4.0};

    int min_shapes = 0;
    int max_shapes = 5;
    Range separation_px{1.0, 4.0};
    Range shape_scale_frac{0.04, 0.11}; // shape scale / image size
    double varied_fraction = 0.5;       // disks with mixed kinds, scales and rotations
    std::vector<ShapeKind> kinds{ShapeKind::circle,           ShapeKind::ellipse, ShapeKind::rounded_rectangle,
                                 ShapeKind::rounded_triangle, ShapeKind::capsule, ShapeKind::cross,
                                 ShapeKind::blob};
    std::vector<double> kind_weights{3, 2, 2, 1, 1, 1, 2};

    int min_seeds = 3;
    int max_seeds = 12;
    Range border_radius_px{0.8, 2.0};
    Range corner_smoothing_px{0.5, 2.5};

    void validate() const;
    int image_size() const { return geometry.image_size; }

    /// Defaults rescaled to the 64 x 64 desk geometry.
    static DatasetManifest desk_small();
};

/// Whether sample `index` is Voronoi-filled. Assignment is interleaved so that
/// every prefix keeps the configured split and the total is exact.
bool is_voronoi_sample(const DatasetManifest& m, int index);

/// Draws the parameters of sample `index`; pure function of (manifest, index).
PhantomSpec sample_spec(const DatasetManifest& m, int index);

std::string sample_name(int index, const char* ext);

/// Writes manifest.json and sample_%06d.laim (+ .lasg) under `dir`.
void generate_dataset(const DatasetManifest& m, const std::filesystem::path& dir);

} // namespace lact::phantom
