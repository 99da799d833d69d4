#include "lact/geometry.hpp"

#include "lact/errors.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace lact {

namespace {

bool on_grid(double value, double step)
{
    const double k = value / step;
    return std::abs(k - std::round(k)) < 1e-9;
}

} // namespace

void FanBeamGeometry::validate() const
{
    if (num_detectors < 1 || num_angles < 1 || image_size < 1)
        throw GeometryError("geometry counts must be positive");
    if (!(detector_pixel_size > 0.0) || !(source_to_center > 0.0) || !(center_to_detector > 0.0) ||
        !(image_pixel_size > 0.0) || !(angle_step_deg > 0.0))
        throw GeometryError("geometry lengths and angle step must be strictly positive");

    const double fov_radius = 0.5 * image_extent();
    if (fov_radius >= source_to_center)
        throw GeometryError("image field of view reaches the source");
    const double half_fan = std::atan(0.5 * num_detectors * detector_pixel_size / source_to_detector());
    const double needed = std::asin(fov_radius / source_to_center);
    if (half_fan < needed) {
        std::ostringstream msg;
        msg << "fan does not cover the field of view: half-fan " << half_fan * 180.0 / std::numbers::pi
            << " deg < required " << needed * 180.0 / std::numbers::pi << " deg";
        throw GeometryError(msg.str());
    }
}

FanBeamGeometry FanBeamGeometry::with_angles(double start_deg, double step_deg, int count) const
{
    FanBeamGeometry g = *this;
    g.angle_start_deg = start_deg;
    g.angle_step_deg = step_deg;
    g.num_angles = count;
    return g;
}

FanBeamGeometry FanBeamGeometry::desk()
{
    return FanBeamGeometry{};
}

FanBeamGeometry FanBeamGeometry::desk_small()
{
    FanBeamGeometry g;
    g.num_detectors = 72;
    g.detector_pixel_size = 1.6;
    g.image_size = 64;
    g.image_pixel_size = 1.094;
    return g;
}

void AngularWindow::validate(double step_deg) const
{
    if (!on_grid(alpha_deg, step_deg) || !on_grid(beta_deg, step_deg))
        throw UsageError("window ends must be multiples of the angle step");
    const double range = range_deg();
    if (range < 30.0 - 1e-9 || range > 90.0 + 1e-9)
        throw UsageError("window range must lie in [30, 90] degrees");
    if (alpha_deg < -1e-9 || beta_deg > 360.0 + 1e-9)
        throw UsageError("window must lie inside [0, 360] degrees without wrap-around");
}

double level_range_deg(int level)
{
    if (level < 1 || level > 7)
        throw UsageError("difficulty level must be in 1..7");
    return 100.0 - 10.0 * level;
}

int rows_for_range(double range_deg, double step_deg)
{
    return static_cast<int>(std::lround(range_deg / step_deg)) + 1;
}

} // namespace lact
