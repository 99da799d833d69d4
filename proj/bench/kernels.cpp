// Serial reference vs OpenMP kernels. Thread count follows OMP_NUM_THREADS.
#include "lact/fbp.hpp"
#include "lact/nn/kernels.hpp"
#include "lact/projector.hpp"
#include "lact/rng.hpp"

#include <benchmark/benchmark.h>

#include <vector>

using namespace lact;

namespace {

std::vector<float> noise(std::size_t n, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<float> v(n);
    for (auto& x : v)
        x = static_cast<float>(uniform(rng, -1.0, 1.0));
    return v;
}

const FanBeamGeometry& geom()
{
    static const FanBeamGeometry g = FanBeamGeometry::desk();
    return g;
}

template <bool Parallel>
void BM_forward_project(benchmark::State& state)
{
    const auto& g = geom();
    const auto img = noise(static_cast<std::size_t>(g.image_size) * g.image_size, 1);
    std::vector<float> sino(static_cast<std::size_t>(g.num_angles) * g.num_detectors);
    for (auto _ : state) {
        if constexpr (Parallel)
            forward_project<float>(img, sino, g);
        else
            forward_project_serial<float>(img, sino, g);
        benchmark::DoNotOptimize(sino.data());
    }
}

template <bool Parallel>
void BM_back_project(benchmark::State& state)
{
    const auto& g = geom();
    const auto sino = noise(static_cast<std::size_t>(g.num_angles) * g.num_detectors, 2);
    std::vector<float> img(static_cast<std::size_t>(g.image_size) * g.image_size);
    for (auto _ : state) {
        if constexpr (Parallel)
            back_project<float>(sino, img, g);
        else
            back_project_serial<float>(sino, img, g);
        benchmark::DoNotOptimize(img.data());
    }
}

template <bool Parallel>
void BM_fbp_backproject(benchmark::State& state)
{
    Sinogram s(geom());
    s.values = noise(s.values.size(), 3);
    for (auto _ : state) {
        Image out = Parallel ? fbp::fbp_backproject(s, 0.5) : fbp::fbp_backproject_serial(s, 0.5);
        benchmark::DoNotOptimize(out.values.data());
    }
}

template <bool Parallel>
void BM_gemm(benchmark::State& state)
{
    const int n = static_cast<int>(state.range(0));
    const auto a = noise(static_cast<std::size_t>(n) * n, 4), b = noise(static_cast<std::size_t>(n) * n, 5);
    std::vector<float> c(static_cast<std::size_t>(n) * n);
    for (auto _ : state) {
        if constexpr (Parallel)
            nn::kernels::gemm(n, n, n, a.data(), b.data(), c.data(), false);
        else
            nn::kernels::gemm_reference(n, n, n, a.data(), b.data(), c.data(), false);
        benchmark::DoNotOptimize(c.data());
    }
    state.SetItemsProcessed(state.iterations() * 2LL * n * n * n);
}

nn::kernels::ConvShape conv_shape()
{
    nn::kernels::ConvShape s;
    s.batch = 8;
    s.in_channels = 32;
    s.out_channels = 32;
    s.in_h = s.in_w = 23;
    s.kernel = 5;
    s.pad = 2;
    return s;
}

template <bool Parallel>
void BM_conv_forward(benchmark::State& state)
{
    const auto s = conv_shape();
    const auto x = noise(static_cast<std::size_t>(s.batch * s.in_size()), 6);
    const auto w = noise(static_cast<std::size_t>(s.out_channels * s.patch()), 7);
    std::vector<float> y(static_cast<std::size_t>(s.batch * s.out_size()));
    for (auto _ : state) {
        if constexpr (Parallel)
            nn::kernels::conv2d_forward<float>(s, x.data(), w.data(), nullptr, y.data());
        else
            nn::kernels::conv2d_forward_reference<float>(s, x.data(), w.data(), nullptr, y.data());
        benchmark::DoNotOptimize(y.data());
    }
}

template <bool Parallel>
void BM_conv_backward_input(benchmark::State& state)
{
    const auto s = conv_shape();
    const auto dy = noise(static_cast<std::size_t>(s.batch * s.out_size()), 8);
    const auto w = noise(static_cast<std::size_t>(s.out_channels * s.patch()), 9);
    std::vector<float> dx(static_cast<std::size_t>(s.batch * s.in_size()));
    for (auto _ : state) {
        if constexpr (Parallel) {
            nn::kernels::conv2d_backward_input<float>(s, dy.data(), w.data(), dx.data(), false);
        } else {
            std::fill(dx.begin(), dx.end(), 0.0f);
            nn::kernels::conv2d_backward_input_reference<float>(s, dy.data(), w.data(), dx.data());
        }
        benchmark::DoNotOptimize(dx.data());
    }
}

} // namespace

BENCHMARK(BM_forward_project<false>)->Name("forward_project/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_forward_project<true>)->Name("forward_project/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_back_project<false>)->Name("back_project/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_back_project<true>)->Name("back_project/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_fbp_backproject<false>)->Name("fbp_backproject/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_fbp_backproject<true>)->Name("fbp_backproject/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_gemm<false>)->Name("gemm/reference")->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_gemm<true>)->Name("gemm/omp")->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_conv_forward<false>)->Name("conv2d_forward/reference")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_conv_forward<true>)->Name("conv2d_forward/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_conv_backward_input<false>)->Name("conv2d_backward_input/reference")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_conv_backward_input<true>)->Name("conv2d_backward_input/omp")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
