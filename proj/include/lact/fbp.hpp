#pragma once

#include "lact/geometry.hpp"

#include <complex>
#include <vector>

namespace lact::fbp {

enum class FilterKind { ram_lak, hann };

struct FilterSpec {
    FilterKind kind = FilterKind::hann;
    double cutoff = 1.0;  // fraction of Nyquist, (0, 1]

    void validate() const;
};

FilterKind filter_kind_from_string(const std::string& name);

/// Spatial Ram-Lak kernel for sample spacing `delta`:
/// 1/(4 delta^2) at 0, -1/(k^2 pi^2 delta^2) at odd k, 0 at even k != 0.
double ramlak_tap(int k, double delta);

/// Frequency-domain ramp for rows of a fixed length. The response is the
/// transform of the spatial Ram-Lak kernel on the padded circle, with the
/// DC term set to exactly zero, optionally Hann-windowed and cut off.
class RampFilter {
public:
    RampFilter(int row_length, double delta, const FilterSpec& spec);

    int row_length() const { return n_; }
    int padded_length() const { return padded_; }
    const std::vector<double>& response() const { return response_; }

    /// Filters one row in place (linear convolution, cropped to the row).
    void apply(std::vector<double>& row) const;
    /// Full circular output over the padded length, before cropping.
    std::vector<double> apply_padded(const std::vector<double>& row) const;

private:
    int n_;
    int padded_;
    std::vector<double> response_;   // padded_/2 + 1 real gains
};

/// Ramp-filters every row (no sample-spacing scale factor applied).
Sinogram ramp_filter_rows(const Sinogram& sino, const FilterSpec& filter);

/// Flat-detector fan-beam FBP over the sinogram's own angle range: cosine
/// pre-weighting, ramp filtering, U^-2 weighted back projection with linear
/// interpolation along the detector.
Image fbp_reconstruct(const Sinogram& sino, const FanBeamGeometry& geom, const FilterSpec& filter = {});

/// Pixel-driven weighted back projection of already filtered rows; the
/// single-threaded reference of the inner loop in fbp_reconstruct.
Image fbp_backproject_serial(const Sinogram& filtered, double angle_weight);
Image fbp_backproject(const Sinogram& filtered, double angle_weight);

} // namespace lact::fbp
