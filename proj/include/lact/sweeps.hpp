#pragma once

#include "lact/training.hpp"

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace lact::sweep {

/// One evaluated point of a sweep; `param` is the swept quantity.
struct SweepRow {
    std::string sweep;
    double param = 0.0;
    int level = 0;
    double range_deg = 0.0;
    double mcc_mean = 0.0;
    double mcc_sum = 0.0;
    double psnr_mean = 0.0;
    double ssim_mean = 0.0;
    int samples = 0;
};

SweepRow to_row(const std::string& sweep, double param, const train::RangeScore& s);

/// Reconstructors bind to a dataset, so sweeps that synthesize new data ask for one per set.
using ReconstructorFactory = std::function<train::BatchReconstructor(const train::EvalSet&)>;

/// Ranges lo, lo+step, ..., hi.
std::vector<SweepRow> angular_sweep(const train::BatchReconstructor& recon, const train::EvalSet& set,
                                    double lo = 30.0, double hi = 90.0, double step = 0.5);

std::vector<SweepRow> level_sweep(const train::BatchReconstructor& recon, const train::EvalSet& set,
                                  std::span<const int> levels);

/// Integer horizontal shift, positive to the right, zero fill.
Image shift_horizontal(const Image& image, int px);

/// Cuts `count` soft cross-shaped holes at random spots where the cross fits
/// inside the bright part of the image.
Image add_crosses(const Image& image, int count, Rng& rng);

/// Copies the images of `indices`, applies `edit` and reprojects them with the
/// dataset geometry. The result holds only the edited samples.
train::Dataset edited_copy(const train::Dataset& data, std::span<const int> indices,
                           const std::function<Image(int index, const Image&)>& edit);

std::vector<SweepRow> position_sweep(const ReconstructorFactory& make, const train::Dataset& data,
                                     std::span<const int> indices, std::span<const int> offsets_px,
                                     double range_deg, std::uint64_t seed);

std::vector<SweepRow> crosses_sweep(const ReconstructorFactory& make, const train::Dataset& data,
                                    std::span<const int> indices, std::span<const int> counts, double range_deg,
                                    std::uint64_t seed);

/// Trains one model per training-set size with the same number of updates
/// and scores it on the held-out split at the configured eval levels.
std::vector<SweepRow> datasize_sweep(const train::TrainConfig& config, const train::Dataset& data,
                                     std::span<const int> sizes, std::int64_t steps,
                                     const std::function<void(const std::string&)>& progress = {});

/// Columns: sweep, param, level, range_deg, mcc_mean, mcc_sum, psnr_mean, ssim_mean, samples.
void write_sweep_csv(const std::filesystem::path& path, std::span<const SweepRow> rows);

} // namespace lact::sweep
