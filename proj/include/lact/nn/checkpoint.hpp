#pragma once

#include "lact/nn/adam.hpp"
#include "lact/nn/model.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lact::nn {

struct NamedArray {
    std::string name;
    Shape shape;
    std::vector<float> values;
};

struct Checkpoint {
    static constexpr std::uint32_t kVersion = 1;

    ModelConfig config;
    /// Model parameters and batch-norm statistics.
    std::vector<NamedArray> tensors;
    struct Optimizer {
        std::uint64_t step = 0;
        std::vector<NamedArray> m, v;  // names without the adam.m./adam.v. prefix
    };
    std::optional<Optimizer> optimizer;
};

Checkpoint make_checkpoint(const Model<float>& model, const Adam<float>* optimizer);

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const Model<float>& model, const Adam<float>* optimizer);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Builds the model described by the checkpoint and loads its tensors.
Model<float> restore_model(const Checkpoint& ckpt);
/// Loads the optimizer block into `opt` (no-op if the checkpoint has none).
void restore_optimizer(const Checkpoint& ckpt, Adam<float>& opt);

} // namespace lact::nn
