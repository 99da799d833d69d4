#pragma once

#include "lact/nn/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lact::nn {

struct AdamOptions {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Adam with bias-corrected moments. Parameters without a gradient are
/// treated as having a zero gradient.
template <class T>
class Adam {
public:
    Adam(NamedTensors<T> params, AdamOptions options = {});

    void step();
    void zero_grad();

    std::uint64_t step_count() const { return step_; }
    const AdamOptions& options() const { return options_; }
    void set_lr(double lr) { options_.lr = lr; }
    const NamedTensors<T>& params() const { return params_; }

    struct State {
        std::uint64_t step = 0;
        std::vector<std::pair<std::string, std::vector<float>>> m, v;
    };
    State state() const;
    void load_state(const State& s);

private:
    NamedTensors<T> params_;
    AdamOptions options_;
    std::uint64_t step_ = 0;
    std::vector<std::vector<T>> m_, v_;
};

extern template class Adam<float>;
extern template class Adam<double>;

} // namespace lact::nn
