#pragma once

#include "lact/projector.hpp"

#include <span>

namespace lact {

enum class Sampling { bilinear, nearest };

/// Reference line integral by dense sampling along `ray` (midpoint rule,
/// sum * step). Pixel centers are the interpolation nodes; bilinear sampling
/// clamps to the border pixels inside the image square and is zero outside.
/// Independent of the traversal in trace_ray; meant for tests.
double line_integral_oracle(std::span<const double> image, int size, double pixel_size, const Ray& ray,
                            double step, Sampling mode = Sampling::bilinear);

} // namespace lact
