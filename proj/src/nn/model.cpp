#include "lact/nn/model.hpp"

#include "lact/errors.hpp"

#include <cmath>
#include <map>

namespace lact::nn {

// ----------------------------------------------------------- ModelConfig

ModelConfig ModelConfig::full_scale()
{
    return ModelConfig{};
}

ModelConfig ModelConfig::desk()
{
    ModelConfig c;
    c.input_cols = 140;
    c.bottleneck_channels = 128;
    c.encoder_channels = {16, 32, 64, 128};
    c.decoder_stages = {64, 32, 16, 8};
    c.output_size = 128;
    return c;
}

ModelConfig ModelConfig::desk_small()
{
    ModelConfig c;
    c.input_cols = 72;
    c.bottleneck_channels = 64;
    c.encoder_channels = {16, 32, 64};
    c.blocks_per_stage = {1, 1, 1};
    c.inverted_bottleneck_ratio = 2;
    c.decoder_stages = {32, 16, 8};
    c.output_size = 64;
    return c;
}

std::vector<std::pair<int, int>> ModelConfig::encoder_sizes() const
{
    std::vector<std::pair<int, int>> sizes;
    auto stem = [&](int n) { return n <= stem_kernel ? 1 : (n - stem_kernel + stem_stride - 1) / stem_stride + 1; };
    int h = stem(input_rows), w = stem(input_cols);
    sizes.emplace_back(h, w);
    for (std::size_t i = 2; i < encoder_channels.size(); ++i) {
        h = (h + 1) / 2;
        w = (w + 1) / 2;
        sizes.emplace_back(h, w);
    }
    return sizes;
}

void ModelConfig::validate() const
{
    auto fail = [](const std::string& msg) { throw UsageError("model config: " + msg); };
    if (input_rows < 1 || input_cols < 1)
        fail("input size must be positive");
    if (stem_kernel < 1 || stem_stride < 1 || block_kernel < 1 || block_kernel % 2 == 0)
        fail("kernels must be positive and block_kernel odd");
    if (inverted_bottleneck_ratio < 1)
        fail("inverted_bottleneck_ratio must be >= 1");
    if (encoder_channels.size() < 2)
        fail("encoder_channels needs a stem entry and a bottleneck entry");
    if (blocks_per_stage.size() != encoder_channels.size())
        fail("blocks_per_stage must have one entry per encoder stage");
    for (int c : encoder_channels)
        if (c < 1)
            fail("channel counts must be positive");
    for (int b : blocks_per_stage)
        if (b < 0)
            fail("block counts must be non-negative");
    if (encoder_channels.back() != bottleneck_channels)
        fail("last encoder stage must have bottleneck_channels channels");
    if (bottleneck_h < 1 || bottleneck_w < 1 || bottleneck_h != bottleneck_w)
        fail("bottleneck must be square and non-empty");
    for (int c : decoder_stages)
        if (c < 1)
            fail("decoder channel counts must be positive");
    if (decoder_blocks < 0)
        fail("decoder_blocks must be non-negative");
    const auto sizes = encoder_sizes();
    if (sizes.back().first < bottleneck_h || sizes.back().second < bottleneck_w)
        fail("encoder reduces the input below the bottleneck (" + std::to_string(sizes.back().first) + "x" +
             std::to_string(sizes.back().second) + ")");
    if (bottleneck_h << decoder_stages.size() != output_size)
        fail("output_size must equal bottleneck side * 2^(decoder stages) = " +
             std::to_string(bottleneck_h << decoder_stages.size()));
    if (!(input_scale > 0.0) || !(residual_init_scale >= 0.0))
        fail("input_scale must be positive and residual_init_scale non-negative");
}

Json to_json(const ModelConfig& c)
{
    return Json{{"input_rows", c.input_rows},
                {"input_cols", c.input_cols},
                {"use_mask_channel", c.use_mask_channel},
                {"stem_kernel", c.stem_kernel},
                {"stem_stride", c.stem_stride},
                {"block_kernel", c.block_kernel},
                {"bottleneck_spatial", Json::array({c.bottleneck_h, c.bottleneck_w})},
                {"bottleneck_channels", c.bottleneck_channels},
                {"inverted_bottleneck_ratio", c.inverted_bottleneck_ratio},
                {"encoder_channels", c.encoder_channels},
                {"blocks_per_stage", c.blocks_per_stage},
                {"decoder_stages", c.decoder_stages},
                {"decoder_blocks", c.decoder_blocks},
                {"output_size", c.output_size},
                {"input_scale", c.input_scale},
                {"residual_init_scale", c.residual_init_scale}};
}

ModelConfig model_config_from_json(const Json& j, ModelConfig c)
{
    reject_unknown_keys(j,
                        {"preset", "input_rows", "input_cols", "use_mask_channel", "stem_kernel", "stem_stride",
                         "block_kernel", "bottleneck_spatial", "bottleneck_channels", "inverted_bottleneck_ratio",
                         "encoder_channels", "blocks_per_stage", "decoder_stages", "decoder_blocks", "output_size",
                         "input_scale", "residual_init_scale"},
                        "model config");
    if (auto it = j.find("preset"); it != j.end()) {
        const std::string p = it->get<std::string>();
        if (p == "full")
            c = ModelConfig::full_scale();
        else if (p == "desk")
            c = ModelConfig::desk();
        else if (p == "desk_small")
            c = ModelConfig::desk_small();
        else
            throw UsageError("unknown model preset '" + p + "' (use full, desk or desk_small)");
    }
    read_optional(j, "input_rows", c.input_rows);
    read_optional(j, "input_cols", c.input_cols);
    read_optional(j, "use_mask_channel", c.use_mask_channel);
    read_optional(j, "stem_kernel", c.stem_kernel);
    read_optional(j, "stem_stride", c.stem_stride);
    read_optional(j, "block_kernel", c.block_kernel);
    if (auto it = j.find("bottleneck_spatial"); it != j.end()) {
        const auto v = it->get<std::vector<int>>();
        if (v.size() != 2)
            throw UsageError("bottleneck_spatial must be [h, w]");
        c.bottleneck_h = v[0];
        c.bottleneck_w = v[1];
    }
    read_optional(j, "bottleneck_channels", c.bottleneck_channels);
    read_optional(j, "inverted_bottleneck_ratio", c.inverted_bottleneck_ratio);
    read_optional(j, "encoder_channels", c.encoder_channels);
    read_optional(j, "blocks_per_stage", c.blocks_per_stage);
    read_optional(j, "decoder_stages", c.decoder_stages);
    read_optional(j, "decoder_blocks", c.decoder_blocks);
    read_optional(j, "output_size", c.output_size);
    read_optional(j, "input_scale", c.input_scale);
    read_optional(j, "residual_init_scale", c.residual_init_scale);
    return c;
}

// ---------------------------------------------------------------- layers

template <class T>
Tensor<T> Conv2d<T>::operator()(const Tensor<T>& x) const
{
    return transposed ? conv_transpose2d(x, weight, bias, stride, pad) : conv2d(x, weight, bias, stride, pad);
}

template <class T>
void Conv2d<T>::collect(const std::string& prefix, NamedTensors<T>& out) const
{
    out.emplace_back(prefix + ".weight", weight);
    out.emplace_back(prefix + ".bias", bias);
}

namespace {

template <class T>
Tensor<T> normal_tensor(Shape shape, double stddev, Rng& rng)
{
    std::normal_distribution<double> dist(0.0, 1.0);
    std::vector<T> v(static_cast<std::size_t>(numel(shape)));
    for (T& x : v)
        x = static_cast<T>(stddev * dist(rng));
    return Tensor<T>::from(std::move(shape), std::move(v), true);
}

} // namespace

template <class T>
Conv2d<T> make_conv(int in_ch, int out_ch, int kernel, int stride, int pad, double gain, Rng& rng)
{
    Conv2d<T> c;
    const double fan_in = static_cast<double>(in_ch) * kernel * kernel;
    c.weight = normal_tensor<T>({out_ch, in_ch, kernel, kernel}, gain * std::sqrt(2.0 / fan_in), rng);
    c.bias = Tensor<T>::zeros({out_ch}, true);
    c.stride = stride;
    c.pad = pad;
    return c;
}

template <class T>
Conv2d<T> make_conv_transpose(int in_ch, int out_ch, int kernel, int stride, Rng& rng)
{
    Conv2d<T> c;
    // Each output pixel of a k2s2 transposed conv sees in_ch inputs.
    const double fan_in = static_cast<double>(in_ch) * kernel * kernel / (stride * stride);
    c.weight = normal_tensor<T>({in_ch, out_ch, kernel, kernel}, std::sqrt(2.0 / fan_in), rng);
    c.bias = Tensor<T>::zeros({out_ch}, true);
    c.stride = stride;
    c.transposed = true;
    return c;
}

template <class T>
Tensor<T> BatchNorm<T>::operator()(const Tensor<T>& x, bool training)
{
    BatchNormOptions opt;
    opt.training = training;
    return batch_norm(x, gamma, beta, running_mean, running_var, opt);
}

template <class T>
void BatchNorm<T>::collect_params(const std::string& prefix, NamedTensors<T>& out) const
{
    out.emplace_back(prefix + ".gamma", gamma);
    out.emplace_back(prefix + ".beta", beta);
}

template <class T>
void BatchNorm<T>::collect_buffers(const std::string& prefix, NamedTensors<T>& out) const
{
    out.emplace_back(prefix + ".running_mean", running_mean);
    out.emplace_back(prefix + ".running_var", running_var);
}

template <class T>
BatchNorm<T> make_batch_norm(int channels)
{
    BatchNorm<T> b;
    b.gamma = Tensor<T>::from({channels}, std::vector<T>(static_cast<std::size_t>(channels), T(1)), true);
    b.beta = Tensor<T>::zeros({channels}, true);
    b.running_mean = Tensor<T>::zeros({channels});
    b.running_var = Tensor<T>::from({channels}, std::vector<T>(static_cast<std::size_t>(channels), T(1)));
    return b;
}

template <class T>
Tensor<T> ResidualBlock<T>::operator()(const Tensor<T>& x) const
{
    return add(x, conv_b(gelu(conv_a(x))));
}

template <class T>
void ResidualBlock<T>::collect(const std::string& prefix, NamedTensors<T>& out) const
{
    conv_a.collect(prefix + ".conv_a", out);
    conv_b.collect(prefix + ".conv_b", out);
}

template <class T>
ResidualBlock<T> make_residual_block(int channels, int ratio, int kernel, double b_gain, Rng& rng)
{
    ResidualBlock<T> b;
    b.conv_a = make_conv<T>(channels, channels * ratio, kernel, 1, kernel / 2, 1.0, rng);
    b.conv_b = make_conv<T>(channels * ratio, channels, 1, 1, 0, b_gain, rng);
    return b;
}

// ----------------------------------------------------------------- Model

template <class T>
Model<T>::Model(const ModelConfig& config, std::uint64_t seed) : config_(config)
{
    config_.validate();
    Rng rng(seed);
    const ModelConfig& c = config_;
    const int ratio = c.inverted_bottleneck_ratio, k = c.block_kernel;
    const std::size_t stages = c.encoder_channels.size();

    auto add_blocks = [&](Stage& s, int channels, int count) {
        for (int b = 0; b < count; ++b)
            s.blocks.push_back(make_residual_block<T>(channels, ratio, k, c.residual_init_scale, rng));
    };

    for (std::size_t i = 0; i < stages; ++i) {
        Stage s;
        const int out_ch = c.encoder_channels[i];
        if (i == 0)
            s.entry = make_conv<T>(c.input_channels(), out_ch, c.stem_kernel, c.stem_stride, 0, 1.0, rng);
        else if (i + 1 < stages)
            s.entry = make_conv<T>(c.encoder_channels[i - 1], out_ch, 2, 2, 0, 1.0, rng);
        else
            s.entry = make_conv<T>(c.encoder_channels[i - 1], out_ch, 1, 1, 0, 1.0, rng);
        s.bn = make_batch_norm<T>(out_ch);
        add_blocks(s, out_ch, c.blocks_per_stage[i]);
        encoder_.push_back(std::move(s));
    }

    int prev = c.bottleneck_channels;
    for (int ch : c.decoder_stages) {
        Stage s;
        s.entry = make_conv_transpose<T>(prev, ch, 2, 2, rng);
        s.bn = make_batch_norm<T>(ch);
        add_blocks(s, ch, c.decoder_blocks);
        decoder_.push_back(std::move(s));
        prev = ch;
    }
    head_ = make_conv<T>(prev, 1, 1, 1, 0, 1.0, rng);
}

template <class T>
Tensor<T> Model<T>::encode(const Tensor<T>& input)
{
    const ModelConfig& c = config_;
    if (input.rank() != 4 || input.dim(1) != c.input_channels() || input.dim(2) != c.input_rows ||
        input.dim(3) != c.input_cols)
        throw ShapeError("model input " + to_string(input.shape()) + " does not match config (N, " +
                         std::to_string(c.input_channels()) + ", " + std::to_string(c.input_rows) + ", " +
                         std::to_string(c.input_cols) + ")");

    std::vector<T> gains(static_cast<std::size_t>(c.input_channels()), T(1));
    gains[0] = static_cast<T>(c.input_scale);
    Tensor<T> x = channel_scale(input, gains);

    const auto sizes = c.encoder_sizes();
    const std::size_t stages = encoder_.size();
    for (std::size_t i = 0; i < stages; ++i) {
        Stage& s = encoder_[i];
        if (i == 0) {
            const int ph = (sizes[0].first - 1) * c.stem_stride + c.stem_kernel - x.dim(2);
            const int pw = (sizes[0].second - 1) * c.stem_stride + c.stem_kernel - x.dim(3);
            x = pad2d(x, 0, std::max(ph, 0), 0, std::max(pw, 0));
        } else if (i + 1 < stages) {
            x = pad2d(x, 0, x.dim(2) % 2, 0, x.dim(3) % 2);
        } else {
            x = adaptive_avg_pool2d(x, c.bottleneck_h, c.bottleneck_w);
        }
        x = s.bn(s.entry(x), training_);
        for (const auto& b : s.blocks)
            x = b(x);
    }
    return x;
}

template <class T>
Tensor<T> Model<T>::decode(const Tensor<T>& z)
{
    Tensor<T> x = z;
    for (Stage& s : decoder_) {
        x = s.bn(s.entry(x), training_);
        for (const auto& b : s.blocks)
            x = b(x);
    }
    return head_(x);
}

template <class T>
Tensor<T> Model<T>::forward(const Tensor<T>& input)
{
    return decode(encode(input));
}

template <class T>
void Model<T>::collect(NamedTensors<T>* params, NamedTensors<T>* buffers) const
{
    auto stage = [&](const std::string& prefix, const Stage& s, const char* entry_name) {
        if (params) {
            s.entry.collect(prefix + "." + entry_name, *params);
            s.bn.collect_params(prefix + ".bn", *params);
            for (std::size_t b = 0; b < s.blocks.size(); ++b)
                s.blocks[b].collect(prefix + ".block" + std::to_string(b), *params);
        }
        if (buffers)
            s.bn.collect_buffers(prefix + ".bn", *buffers);
    };
    for (std::size_t i = 0; i < encoder_.size(); ++i) {
        const char* entry = i == 0 ? "stem" : (i + 1 < encoder_.size() ? "down" : "align");
        stage("enc" + std::to_string(i), encoder_[i], entry);
    }
    for (std::size_t i = 0; i < decoder_.size(); ++i)
        stage("dec" + std::to_string(i), decoder_[i], "up");
    if (params)
        head_.collect("head", *params);
}

template <class T>
NamedTensors<T> Model<T>::parameters() const
{
    NamedTensors<T> out;
    collect(&out, nullptr);
    return out;
}

template <class T>
NamedTensors<T> Model<T>::buffers() const
{
    NamedTensors<T> out;
    collect(nullptr, &out);
    return out;
}

template <class T>
NamedTensors<T> Model<T>::state() const
{
    NamedTensors<T> out;
    collect(&out, nullptr);
    collect(nullptr, &out);
    return out;
}

template <class T>
std::int64_t Model<T>::parameter_count() const
{
    std::int64_t n = 0;
    for (const auto& [name, t] : parameters())
        n += t.numel();
    return n;
}

template <class T>
void Model<T>::load_state(const std::vector<std::pair<std::string, std::vector<float>>>& values)
{
    std::map<std::string, const std::vector<float>*> by_name;
    for (const auto& [name, v] : values)
        if (!by_name.emplace(name, &v).second)
            throw DataError("duplicate tensor '" + name + "' in model state");
    NamedTensors<T> st = state();
    if (by_name.size() != st.size())
        throw DataError("model state has " + std::to_string(by_name.size()) + " tensors, config expects " +
                        std::to_string(st.size()));
    for (auto& [name, t] : st) {
        auto it = by_name.find(name);
        if (it == by_name.end())
            throw DataError("model state is missing tensor '" + name + "'");
        if (static_cast<std::int64_t>(it->second->size()) != t.numel())
            throw ShapeError("tensor '" + name + "' has " + std::to_string(it->second->size()) +
                             " values, expected " + std::to_string(t.numel()));
        std::copy(it->second->begin(), it->second->end(), t.values().begin());
    }
}

#define LACT_INSTANTIATE(T)                                                                           \
    template struct Conv2d<T>;                                                                        \
    template struct BatchNorm<T>;                                                                     \
    template struct ResidualBlock<T>;                                                                 \
    template Conv2d<T> make_conv<T>(int, int, int, int, int, double, Rng&);                           \
    template Conv2d<T> make_conv_transpose<T>(int, int, int, int, Rng&);                              \
    template BatchNorm<T> make_batch_norm<T>(int);                                                    \
    template ResidualBlock<T> make_residual_block<T>(int, int, int, double, Rng&);                    \
    template class Model<T>;

LACT_INSTANTIATE(float)
LACT_INSTANTIATE(double)

#undef LACT_INSTANTIATE

} // namespace lact::nn
