#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace lact {

/// Flat-detector fan-beam acquisition.
///
/// World frame: origin at the rotation center, +x to the right, +y up.
/// The object is fixed while source and detector rotate counterclockwise;
/// at angle 0 the source sits on the +x axis. Detector cell k lies at
/// offset (k - (n-1)/2) * pitch along the detector axis (-sin t, cos t).
/// Image row 0 is the top row (largest y).
struct FanBeamGeometry {
    int num_detectors = 140;
    double detector_pixel_size = 0.8;   // mm
    double source_to_center = 410.0;    // mm
    double center_to_detector = 140.0;  // mm
    int num_angles = 721;
    double angle_start_deg = 0.0;
    double angle_step_deg = 0.5;
    int image_size = 128;               // pixels, square
    double image_pixel_size = 0.547;    // mm

    /// Throws GeometryError when a field is out of range or the fan does not
    /// cover the inscribed field-of-view circle of the image grid.
    void validate() const;

    double source_to_detector() const { return source_to_center + center_to_detector; }
    double angle_deg(int row) const { return angle_start_deg + row * angle_step_deg; }
    double detector_offset(int k) const { return (k - 0.5 * (num_detectors - 1)) * detector_pixel_size; }
    double image_extent() const { return image_size * image_pixel_size; }

    /// Same acquisition with a different angle grid.
    FanBeamGeometry with_angles(double start_deg, double step_deg, int count) const;

    bool operator==(const FanBeamGeometry&) const = default;

    /// 128 x 128 desk geometry with a full 360 degree, 0.5 degree scan.
    static FanBeamGeometry desk();
    /// 64 x 64 desk geometry used by the end-to-end learning runs.
    static FanBeamGeometry desk_small();
};

enum class Provenance : std::uint8_t { synthetic, reconstruction };

/// Square attenuation map, row-major.
struct Image {
    int size = 0;
    std::vector<float> values;
    Provenance provenance = Provenance::synthetic;

    Image() = default;
    explicit Image(int n, Provenance p = Provenance::synthetic)
        : size(n), values(static_cast<std::size_t>(n) * n, 0.0f), provenance(p) {}

    float& at(int row, int col) { return values[static_cast<std::size_t>(row) * size + col]; }
    float at(int row, int col) const { return values[static_cast<std::size_t>(row) * size + col]; }
    std::size_t pixel_count() const { return values.size(); }
};

/// Angle-by-detector matrix of line integrals, angle-major.
struct Sinogram {
    FanBeamGeometry geometry;
    std::vector<float> values;

    Sinogram() = default;
    explicit Sinogram(const FanBeamGeometry& g)
        : geometry(g), values(static_cast<std::size_t>(g.num_angles) * g.num_detectors, 0.0f) {}

    int num_angles() const { return geometry.num_angles; }
    int num_detectors() const { return geometry.num_detectors; }
    float& at(int row, int det) { return values[static_cast<std::size_t>(row) * geometry.num_detectors + det]; }
    float at(int row, int det) const { return values[static_cast<std::size_t>(row) * geometry.num_detectors + det]; }
};

/// Contiguous acquired range [alpha, beta] in degrees.
struct AngularWindow {
    double alpha_deg = 0.0;
    double beta_deg = 90.0;

    double range_deg() const { return beta_deg - alpha_deg; }
    /// Checks grid alignment to `step_deg`, 30 <= range <= 90 and beta <= 360.
    void validate(double step_deg) const;
    bool operator==(const AngularWindow&) const = default;
};

/// Rows covered by a difficulty level (1..7): 90, 80, ..., 30 degrees.
double level_range_deg(int level);
/// Number of sinogram rows m for a range at the given step (inclusive ends).
int rows_for_range(double range_deg, double step_deg);

} // namespace lact
