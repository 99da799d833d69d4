#pragma once

#include "lact/json_io.hpp"
#include "lact/nn/ops.hpp"
#include "lact/rng.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace lact::nn {

struct ModelConfig {
    int input_rows = 181;
    int input_cols = 560;
    bool use_mask_channel = true;
    int stem_kernel = 4;
    int stem_stride = 4;
    int block_kernel = 5;
    int bottleneck_h = 8;
    int bottleneck_w = 8;
    int bottleneck_channels = 512;
    int inverted_bottleneck_ratio = 4;
    /// Channels after the stem, after each k2s2 downsample, and after the
    /// alignment to the bottleneck (last entry == bottleneck_channels).
    std::vector<int> encoder_channels{64, 128, 256, 512};
    std::vector<int> blocks_per_stage{1, 2, 2, 2};
    /// Channels of each k2s2 transposed-convolution stage.
    std::vector<int> decoder_stages{256, 128, 64, 32, 16, 8};
    int decoder_blocks = 1;
    int output_size = 512;
    /// Constant gain on the sinogram channel before the stem.
    double input_scale = 0.02;
    /// Std multiplier for the projecting convolution of each residual block.
    double residual_init_scale = 0.1;

    static ModelConfig full_scale();
    /// 181 x 140 sinograms to 128 x 128 images.
    static ModelConfig desk();
    /// 181 x 72 sinograms to 64 x 64 images.
    static ModelConfig desk_small();

    int input_channels() const { return use_mask_channel ? 2 : 1; }
    /// Spatial size after the stem and after each downsample (before alignment).
    std::vector<std::pair<int, int>> encoder_sizes() const;
    /// Throws UsageError on inconsistent settings.
    void validate() const;
};

Json to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const Json& j, ModelConfig base = {});

template <class T>
using NamedTensors = std::vector<std::pair<std::string, Tensor<T>>>;

template <class T>
struct Conv2d {
    Tensor<T> weight, bias;
    int stride = 1;
    int pad = 0;
    bool transposed = false;

    Tensor<T> operator()(const Tensor<T>& x) const;
    void collect(const std::string& prefix, NamedTensors<T>& out) const;
};

/// Kaiming-normal weights scaled by `gain`, zero bias.
template <class T>
Conv2d<T> make_conv(int in_ch, int out_ch, int kernel, int stride, int pad, double gain, Rng& rng);
template <class T>
Conv2d<T> make_conv_transpose(int in_ch, int out_ch, int kernel, int stride, Rng& rng);

template <class T>
struct BatchNorm {
    Tensor<T> gamma, beta, running_mean, running_var;

    Tensor<T> operator()(const Tensor<T>& x, bool training);
    void collect_params(const std::string& prefix, NamedTensors<T>& out) const;
    void collect_buffers(const std::string& prefix, NamedTensors<T>& out) const;
};

template <class T>
BatchNorm<T> make_batch_norm(int channels);

/// x + conv_b(gelu(conv_a(x))), conv_a expands by the ratio with a k x k kernel.
template <class T>
struct ResidualBlock {
    Conv2d<T> conv_a, conv_b;

    Tensor<T> operator()(const Tensor<T>& x) const;
    void collect(const std::string& prefix, NamedTensors<T>& out) const;
};

template <class T>
ResidualBlock<T> make_residual_block(int channels, int ratio, int kernel, double b_gain, Rng& rng);

template <class T>
class Model {
public:
    Model(const ModelConfig& config, std::uint64_t seed);

    /// (N, C, input_rows, input_cols) to (N, 1, output_size, output_size).
    Tensor<T> forward(const Tensor<T>& input);
    /// Bottleneck representation (N, bottleneck_channels, bh, bw).
    Tensor<T> encode(const Tensor<T>& input);
    Tensor<T> decode(const Tensor<T>& z);

    void set_training(bool on) { training_ = on; }
    bool training() const { return training_; }
    const ModelConfig& config() const { return config_; }

    NamedTensors<T> parameters() const;
    NamedTensors<T> buffers() const;
    /// Parameters followed by buffers.
    NamedTensors<T> state() const;
    std::int64_t parameter_count() const;

    /// Copies values by name; every entry of state() must be present with the same size.
    void load_state(const std::vector<std::pair<std::string, std::vector<float>>>& values);

private:
    struct Stage {
        Conv2d<T> entry;  // stem, k2s2 downsample or 1x1 after alignment
        BatchNorm<T> bn;
        std::vector<ResidualBlock<T>> blocks;
    };

    ModelConfig config_;
    bool training_ = true;
    std::vector<Stage> encoder_;
    std::vector<Stage> decoder_;
    Conv2d<T> head_;

    void collect(NamedTensors<T>* params, NamedTensors<T>* buffers) const;
};

extern template class Model<float>;
extern template class Model<double>;

} // namespace lact::nn
