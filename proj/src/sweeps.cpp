#include "lact/sweeps.hpp"

#include "lact/errors.hpp"
#include "lact/io.hpp"
#include "lact/phantom.hpp"
#include "lact/projector.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lact::sweep {

namespace {

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(9);
    os << v;
    return os.str();
}

constexpr std::uint64_t kCrossRole = 0xc055;

} // namespace

SweepRow to_row(const std::string& sweep, double param, const train::RangeScore& s)
{
    return {sweep,       param,       s.level,     s.range_deg,
            s.mcc_mean,  s.mcc_sum,   s.psnr_mean, s.ssim_mean,
            static_cast<int>(s.samples.size())};
}

std::vector<SweepRow> angular_sweep(const train::BatchReconstructor& recon, const train::EvalSet& set, double lo,
                                    double hi, double step)
{
    if (!(step > 0.0) || lo > hi)
        throw UsageError("angular sweep needs lo <= hi and a positive step");
    std::vector<SweepRow> rows;
    const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
    for (int i = 0; i <= n; ++i) {
        const double range = lo + i * step;
        rows.push_back(to_row("angular", range, train::evaluate_range(recon, set, range)));
    }
    return rows;
}

std::vector<SweepRow> level_sweep(const train::BatchReconstructor& recon, const train::EvalSet& set,
                                  std::span<const int> levels)
{
    std::vector<SweepRow> rows;
    for (const auto& s : train::evaluate_levels(recon, set, levels))
        rows.push_back(to_row("level", s.level, s));
    return rows;
}

Image shift_horizontal(const Image& image, int px)
{
    Image out(image.size, image.provenance);
    const int n = image.size;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            const int src = c - px;
            if (src >= 0 && src < n)
                out.at(r, c) = image.at(r, src);
        }
    return out;
}

Image add_crosses(const Image& image, int count, Rng& rng)
{
    const int n = image.size;
    Image out = image;
    if (count <= 0)
        return out;
    const float peak = *std::max_element(image.values.begin(), image.values.end());
    const double scale = 0.09 * n;
    const double band = 1.5;
    const int reach = static_cast<int>(std::ceil(scale + band)) + 1;
    for (int k = 0; k < count; ++k) {
        for (int attempt = 0; attempt < phantom::kMaxPlacementAttempts; ++attempt) {
            phantom::Shape s;
            s.kind = phantom::ShapeKind::cross;
            s.params = {uniform(rng, 0.25, 0.4), uniform(rng, 0.05, 0.2), 0.0, 0.0};
            s.scale = scale;
            s.rotation_deg = uniform(rng, 0.0, 90.0);
            s.tx = uniform(rng, reach, n - 1 - reach);
            s.ty = uniform(rng, reach, n - 1 - reach);
            const int r0 = static_cast<int>(s.ty) - reach, c0 = static_cast<int>(s.tx) - reach;
            bool fits = true;
            for (int r = r0; r <= r0 + 2 * reach && fits; ++r)
                for (int c = c0; c <= c0 + 2 * reach && fits; ++c)
                    if (phantom::signed_distance(s, 0.0, 0.0, c, r) <= band && out.at(r, c) <= 0.5f * peak)
                        fits = false;
            if (!fits)
                continue;
            for (int r = r0; r <= r0 + 2 * reach; ++r)
                for (int c = c0; c <= c0 + 2 * reach; ++c) {
                    const double d = phantom::signed_distance(s, 0.0, 0.0, c, r);
                    out.at(r, c) = static_cast<float>(out.at(r, c) * phantom::smoothstep(d, -band, 0.0));
                }
            break;
        }
    }
    return out;
}

train::Dataset edited_copy(const train::Dataset& data, std::span<const int> indices,
                           const std::function<Image(int index, const Image&)>& edit)
{
    train::Dataset out;
    out.geometry = data.geometry;
    out.images.resize(indices.size());
    out.sinograms.resize(indices.size());
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < static_cast<int>(indices.size()); ++i) {
        try {
            out.images[i] = edit(indices[i], data.images[indices[i]]);
            out.sinograms[i] = forward_project(out.images[i], data.geometry);
        } catch (...) {
#pragma omp critical(lact_edited_copy)
            if (!failure)
                failure = std::current_exception();
        }
    }
    if (failure)
        std::rethrow_exception(failure);
    return out;
}

namespace {

std::vector<int> iota_indices(std::size_t n)
{
    std::vector<int> ids(n);
    for (std::size_t i = 0; i < n; ++i)
        ids[i] = static_cast<int>(i);
    return ids;
}

} // namespace

std::vector<SweepRow> position_sweep(const ReconstructorFactory& make, const train::Dataset& data,
                                     std::span<const int> indices, std::span<const int> offsets_px,
                                     double range_deg, std::uint64_t seed)
{
    std::vector<SweepRow> rows;
    for (int off : offsets_px) {
        const train::Dataset moved =
            edited_copy(data, indices, [off](int, const Image& img) { return shift_horizontal(img, off); });
        const train::EvalSet set{&moved, iota_indices(indices.size()), seed};
        rows.push_back(to_row("position", off, train::evaluate_range(make(set), set, range_deg)));
    }
    return rows;
}

std::vector<SweepRow> crosses_sweep(const ReconstructorFactory& make, const train::Dataset& data,
                                    std::span<const int> indices, std::span<const int> counts, double range_deg,
                                    std::uint64_t seed)
{
    std::vector<SweepRow> rows;
    for (int count : counts) {
        const train::Dataset cut = edited_copy(data, indices, [count, seed](int id, const Image& img) {
            Rng rng(derive_seed(seed, kCrossRole, static_cast<std::uint64_t>(id)));
            return add_crosses(img, count, rng);
        });
        const train::EvalSet set{&cut, iota_indices(indices.size()), seed};
        rows.push_back(to_row("crosses", count, train::evaluate_range(make(set), set, range_deg)));
    }
    return rows;
}

std::vector<SweepRow> datasize_sweep(const train::TrainConfig& config, const train::Dataset& data,
                                     std::span<const int> sizes, std::int64_t steps,
                                     const std::function<void(const std::string&)>& progress)
{
    if (steps <= 0)
        throw UsageError("datasize sweep needs a positive step count");
    std::vector<SweepRow> rows;
    for (int size : sizes) {
        if (size <= 0)
            throw UsageError("datasize sweep sizes must be positive");
        train::TrainConfig c = config;
        c.train_limit = size;
        c.max_steps = steps;
        c.eval_every = 0;
        nn::Model<float> model = train::make_model(c);
        train::TrainOutputs out;
        out.progress = progress;
        train::train(c, data, model, out);
        const train::Split split = train::split_dataset(data.size(), c.holdout_count, c.train_limit);
        const train::EvalSet set{&data, split.holdout, c.seed};
        for (const auto& s : train::evaluate_levels(train::model_reconstructor(model, set), set, c.eval_levels))
            rows.push_back(to_row("datasize", size, s));
    }
    return rows;
}

void write_sweep_csv(const std::filesystem::path& path, std::span<const SweepRow> rows)
{
    std::ostringstream os;
    os << "sweep,param,level,range_deg,mcc_mean,mcc_sum,psnr_mean,ssim_mean,samples\n";
    for (const auto& r : rows)
        os << r.sweep << ',' << fmt(r.param) << ',' << r.level << ',' << fmt(r.range_deg) << ',' << fmt(r.mcc_mean)
           << ',' << fmt(r.mcc_sum) << ',' << fmt(r.psnr_mean) << ',' << fmt(r.ssim_mean) << ',' << r.samples
           << '\n';
    const std::string text = os.str();
    io::write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

} // namespace lact::sweep
