#pragma once

#include "lact/geometry.hpp"
#include "lact/json_io.hpp"
#include "lact/nn/adam.hpp"
#include "lact/nn/model.hpp"
#include "lact/rng.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lact::train {

struct TrainConfig {
    std::string dataset;
    int epochs = 30;
    int batch_size = 8;
    double lr = 1e-4;
    std::vector<double> angular_ranges{30, 40, 50, 60, 70, 80, 90};
    std::vector<double> range_weights{7, 6, 5, 4, 3, 2, 1};
    bool uniform_range_mode = false;
    std::optional<double> fixed_range;
    std::uint64_t seed = 0;
    /// Evaluate the held-out split every this many epochs (0 = never).
    int eval_every = 0;
    std::vector<int> eval_levels{1, 2, 3, 4, 5, 6, 7};
    /// Held-out samples at the end of the dataset; negative means 1% (at least one).
    int holdout_count = -1;
    /// Use only the first train_limit training samples (0 = all).
    int train_limit = 0;
    /// Stop after this many parameter updates (0 = epochs * steps per epoch).
    std::int64_t max_steps = 0;
    /// Rows of the training log are written every log_every steps.
    int log_every = 10;
    nn::ModelConfig model = nn::ModelConfig::desk_small();

    void validate() const;
};

Json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const Json& j, TrainConfig base = {});

// ------------------------------------------------------------ windows

/// Draws (range, alpha) as described by the config on the angle grid `step_deg`.
AngularWindow sample_window(const TrainConfig& config, Rng& rng, double step_deg = 0.5);

/// (1, C, input_rows, input_cols) network input: window rows at the top, zero
/// rows below and, with the mask channel, ones on the valid rows of channel 1.
nn::Tensor<float> prepare_input(const Sinogram& sino, const AngularWindow& w, const nn::ModelConfig& config);
/// Writes the same layout into `dst` (C * input_rows * input_cols floats).
void prepare_input_into(const Sinogram& sino, const AngularWindow& w, const nn::ModelConfig& config, float* dst);

// ------------------------------------------------------------ data

struct Dataset {
    std::vector<Image> images;
    std::vector<Sinogram> sinograms;
    FanBeamGeometry geometry;

    int size() const { return static_cast<int>(images.size()); }
    /// Reads every sample_%06d pair listed by manifest.json under `dir`.
    static Dataset load(const std::filesystem::path& dir);
};

struct Split {
    std::vector<int> train;
    std::vector<int> holdout;
};

Split split_dataset(int count, int holdout_count, int train_limit);

// ------------------------------------------------------------ model use

/// Eval-mode reconstruction in the world frame: f(y) rotated by alpha.
Image reconstruct(nn::Model<float>& model, const Sinogram& sino, const AngularWindow& w);
std::vector<Image> reconstruct_batch(nn::Model<float>& model, std::span<const Sinogram* const> sinos,
                                     std::span<const AngularWindow> windows);

struct StepInput {
    const Image* image;
    const Sinogram* sino;
    AngularWindow window;
};

/// One optimizer update on the batch; returns the loss before the update.
double train_step(nn::Model<float>& model, nn::Adam<float>& opt, std::span<const StepInput> batch);

// ------------------------------------------------------------ evaluation

/// Reconstructs sample `index` of the evaluation set from its full sinogram
/// restricted to window `w`.
using Reconstructor = std::function<Image(int index, const Sinogram& full, const AngularWindow& w)>;
/// Batched variant; a default adapter loops over the single-sample version.
using BatchReconstructor =
    std::function<std::vector<Image>(std::span<const int> indices, std::span<const AngularWindow> windows)>;

struct EvalSet {
    const Dataset* data = nullptr;
    std::vector<int> indices;
    std::uint64_t seed = 0;  // draws the per-sample start angles
};

struct SampleScore {
    int sample_id;
    int level;  // 0 when the range is not a level
    double range_deg;
    double alpha_deg;
    double mcc;
    double psnr_db;
    double ssim;
};

struct RangeScore {
    int level;
    double range_deg;
    double mcc_sum;
    double mcc_mean;
    double psnr_mean;
    double ssim_mean;
    std::vector<SampleScore> samples;
};

/// Start angle used for sample `sample_id` at `range_deg`; deterministic in (seed, id, range).
double eval_alpha(std::uint64_t seed, int sample_id, double range_deg, double step_deg);

RangeScore evaluate_range(const BatchReconstructor& recon, const EvalSet& set, double range_deg, int level = 0);
std::vector<RangeScore> evaluate_levels(const BatchReconstructor& recon, const EvalSet& set,
                                        std::span<const int> levels);

BatchReconstructor batched(const Reconstructor& single, const EvalSet& set);
BatchReconstructor model_reconstructor(nn::Model<float>& model, const EvalSet& set, int batch_size = 16);
BatchReconstructor fbp_reconstructor(const EvalSet& set);
/// Returns the ground truth; scores are perfect by construction.
BatchReconstructor perfect_reconstructor(const EvalSet& set);

// ------------------------------------------------------------ training loop

struct TrainResult {
    std::int64_t steps = 0;
    double final_loss = 0.0;
    std::vector<double> epoch_losses;
};

struct TrainOutputs {
    std::filesystem::path log_csv;         // epoch, step, loss, lr, wall_ms
    std::filesystem::path eval_csv;        // epoch, level, range_deg, mcc_sum, psnr_mean, ssim_mean
    std::filesystem::path checkpoint;      // written at the end (and after each epoch)
    std::function<void(const std::string&)> progress;  // optional stderr-style messages
};

/// Trains `model` (built from config.model) on the training split of `data`.
TrainResult train(const TrainConfig& config, const Dataset& data, nn::Model<float>& model, const TrainOutputs& out);

/// Model initialized from the config's seed.
nn::Model<float> make_model(const TrainConfig& config);

// ------------------------------------------------------------ reports

void write_eval_csv(const std::filesystem::path& path, std::span<const RangeScore> scores);
void write_metrics_csv(const std::filesystem::path& path, std::span<const RangeScore> scores);

} // namespace lact::train
