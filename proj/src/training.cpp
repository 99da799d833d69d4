#include "lact/training.hpp"

#include "lact/errors.hpp"
#include "lact/fbp.hpp"
#include "lact/io.hpp"
#include "lact/metrics.hpp"
#include "lact/nn/checkpoint.hpp"
#include "lact/phantom.hpp"
#include "lact/projector.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace lact::train {

namespace {

constexpr std::uint64_t kInitRole = 0x1217;
constexpr std::uint64_t kWindowRole = 0x3301;
constexpr std::uint64_t kShuffleRole = 0x5a5a;
constexpr std::uint64_t kEvalRole = 0xe7a1;

int level_of_range(double range_deg)
{
    const double level = (100.0 - range_deg) / 10.0;
    const long r = std::lround(level);
    return (std::abs(level - r) < 1e-9 && r >= 1 && r <= 7) ? static_cast<int>(r) : 0;
}

std::string format_double(double v)
{
    std::ostringstream os;
    os.precision(9);
    os << v;
    return os.str();
}

} // namespace

// ------------------------------------------------------------ config

void TrainConfig::validate() const
{
    auto fail = [](const std::string& msg) { throw UsageError("train config: " + msg); };
    if (epochs < 0 || batch_size < 1)
        fail("epochs must be >= 0 and batch_size >= 1");
    if (!(lr >= 0.0))
        fail("lr must be non-negative");
    if (angular_ranges.empty() || angular_ranges.size() != range_weights.size())
        fail("angular_ranges and range_weights must be non-empty and of equal length");
    for (double r : angular_ranges)
        if (r < 30.0 || r > 90.0)
            fail("angular ranges must lie in [30, 90]");
    for (double w : range_weights)
        if (!(w > 0.0))
            fail("range weights must be positive");
    if (fixed_range && (*fixed_range < 30.0 || *fixed_range > 90.0))
        fail("fixed_range must lie in [30, 90]");
    if (eval_every < 0 || log_every < 1 || train_limit < 0 || max_steps < 0)
        fail("eval_every, train_limit and max_steps must be >= 0 and log_every >= 1");
    for (int l : eval_levels)
        if (l < 1 || l > 7)
            fail("eval levels must be in 1..7");
    model.validate();
}

Json to_json(const TrainConfig& c)
{
    Json j{{"dataset", c.dataset},
           {"epochs", c.epochs},
           {"batch_size", c.batch_size},
           {"lr", c.lr},
           {"angular_ranges", c.angular_ranges},
           {"range_weights", c.range_weights},
           {"uniform_range_mode", c.uniform_range_mode},
           {"seed", c.seed},
           {"eval_every", c.eval_every},
           {"eval_levels", c.eval_levels},
           {"holdout_count", c.holdout_count},
           {"train_limit", c.train_limit},
           {"max_steps", c.max_steps},
           {"log_every", c.log_every},
           {"model", nn::to_json(c.model)}};
    j["fixed_range"] = c.fixed_range ? Json(*c.fixed_range) : Json(nullptr);
    return j;
}

TrainConfig train_config_from_json(const Json& j, TrainConfig c)
{
    reject_unknown_keys(j,
                        {"dataset", "epochs", "batch_size", "lr", "angular_ranges", "range_weights",
                         "uniform_range_mode", "fixed_range", "seed", "eval_every", "eval_levels", "holdout_count",
                         "train_limit", "max_steps", "log_every", "model"},
                        "train config");
    read_optional(j, "dataset", c.dataset);
    read_optional(j, "epochs", c.epochs);
    read_optional(j, "batch_size", c.batch_size);
    read_optional(j, "lr", c.lr);
    read_optional(j, "angular_ranges", c.angular_ranges);
    read_optional(j, "range_weights", c.range_weights);
    read_optional(j, "uniform_range_mode", c.uniform_range_mode);
    if (auto it = j.find("fixed_range"); it != j.end())
        c.fixed_range = it->is_null() ? std::nullopt : std::optional<double>(it->get<double>());
    read_optional(j, "seed", c.seed);
    read_optional(j, "eval_every", c.eval_every);
    read_optional(j, "eval_levels", c.eval_levels);
    read_optional(j, "holdout_count", c.holdout_count);
    read_optional(j, "train_limit", c.train_limit);
    read_optional(j, "max_steps", c.max_steps);
    read_optional(j, "log_every", c.log_every);
    if (auto it = j.find("model"); it != j.end())
        c.model = nn::model_config_from_json(*it, c.model);
    return c;
}

// ------------------------------------------------------------ windows

AngularWindow sample_window(const TrainConfig& config, Rng& rng, double step_deg)
{
    double range;
    if (config.fixed_range) {
        range = *config.fixed_range;
    } else if (config.uniform_range_mode) {
        const int steps = static_cast<int>(std::lround(60.0 / step_deg));
        range = 30.0 + step_deg * uniform_int(rng, 0, steps);
    } else {
        std::discrete_distribution<int> pick(config.range_weights.begin(), config.range_weights.end());
        range = config.angular_ranges[static_cast<std::size_t>(pick(rng))];
    }
    const int starts = static_cast<int>(std::lround((360.0 - range) / step_deg));
    AngularWindow w;
    w.alpha_deg = step_deg * uniform_int(rng, 0, starts);
    w.beta_deg = w.alpha_deg + range;
    return w;
}

void prepare_input_into(const Sinogram& sino, const AngularWindow& w, const nn::ModelConfig& config, float* dst)
{
    const FanBeamGeometry& g = sino.geometry;
    w.validate(g.angle_step_deg);
    if (g.num_detectors != config.input_cols)
        throw ShapeError("sinogram has " + std::to_string(g.num_detectors) + " detector cells, model expects " +
                         std::to_string(config.input_cols));
    const int m = rows_for_range(w.range_deg(), g.angle_step_deg);
    if (m > config.input_rows)
        throw ShapeError("window has " + std::to_string(m) + " rows, model input holds " +
                         std::to_string(config.input_rows));
    const double first = (w.alpha_deg - g.angle_start_deg) / g.angle_step_deg;
    const int r0 = static_cast<int>(std::lround(first));
    if (std::abs(first - r0) > 1e-6 || r0 < 0 || r0 + m > g.num_angles)
        throw GeometryError("window is not covered by the sinogram");

    const std::size_t plane = static_cast<std::size_t>(config.input_rows) * config.input_cols;
    std::fill(dst, dst + plane * config.input_channels(), 0.0f);
    std::copy(sino.values.begin() + static_cast<std::ptrdiff_t>(r0) * g.num_detectors,
              sino.values.begin() + static_cast<std::ptrdiff_t>(r0 + m) * g.num_detectors, dst);
    if (config.use_mask_channel)
        std::fill(dst + plane, dst + plane + static_cast<std::size_t>(m) * config.input_cols, 1.0f);
}

nn::Tensor<float> prepare_input(const Sinogram& sino, const AngularWindow& w, const nn::ModelConfig& config)
{
    auto t = nn::Tensor<float>::zeros({1, config.input_channels(), config.input_rows, config.input_cols});
    prepare_input_into(sino, w, config, t.data().data());
    return t;
}

// ------------------------------------------------------------ data

Dataset Dataset::load(const std::filesystem::path& dir)
{
    const auto manifest = manifest_from_json(read_json_file(dir / "manifest.json"));
    if (!manifest.write_sinograms)
        throw DataError("dataset " + dir.string() + " has no sinograms");
    Dataset d;
    d.geometry = manifest.geometry;
    d.images.resize(static_cast<std::size_t>(manifest.count));
    d.sinograms.resize(static_cast<std::size_t>(manifest.count));
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 8)
    for (int i = 0; i < manifest.count; ++i) {
        try {
            d.images[i] = io::read_image(dir / phantom::sample_name(i, "laim"));
            d.sinograms[i] = io::read_sinogram(dir / phantom::sample_name(i, "lasg"), manifest.geometry);
            if (d.images[i].size != manifest.geometry.image_size)
                throw ShapeError("image size of sample " + std::to_string(i) + " does not match the manifest");
        } catch (...) {
#pragma omp critical(lact_dataset_load)
            if (!failure)
                failure = std::current_exception();
        }
    }
    if (failure)
        std::rethrow_exception(failure);
    return d;
}

Split split_dataset(int count, int holdout_count, int train_limit)
{
    if (holdout_count < 0)
        holdout_count = std::max(1, static_cast<int>(std::ceil(0.01 * count)));
    if (holdout_count >= count)
        throw UsageError("holdout leaves no training samples");
    Split s;
    const int train_end = count - holdout_count;
    const int n_train = train_limit > 0 ? std::min(train_limit, train_end) : train_end;
    for (int i = 0; i < n_train; ++i)
        s.train.push_back(i);
    for (int i = train_end; i < count; ++i)
        s.holdout.push_back(i);
    return s;
}

// ------------------------------------------------------------ model use

std::vector<Image> reconstruct_batch(nn::Model<float>& model, std::span<const Sinogram* const> sinos,
                                     std::span<const AngularWindow> windows)
{
    if (sinos.size() != windows.size())
        throw UsageError("one window per sinogram required");
    if (sinos.empty())
        return {};
    const nn::ModelConfig& c = model.config();
    const int nb = static_cast<int>(sinos.size());
    const std::size_t per = static_cast<std::size_t>(c.input_channels()) * c.input_rows * c.input_cols;
    auto x = nn::Tensor<float>::zeros({nb, c.input_channels(), c.input_rows, c.input_cols});
    std::vector<double> alphas(sinos.size());
    for (int i = 0; i < nb; ++i) {
        prepare_input_into(*sinos[i], windows[i], c, x.data().data() + i * per);
        alphas[i] = windows[i].alpha_deg;
    }
    const bool was_training = model.training();
    model.set_training(false);
    nn::Tensor<float> y;
    {
        nn::NoGradGuard guard;
        y = nn::rotate_bilinear(model.forward(x), alphas);
    }
    model.set_training(was_training);

    const int n = c.output_size;
    std::vector<Image> out;
    for (int i = 0; i < nb; ++i) {
        Image img(n, Provenance::reconstruction);
        std::copy(y.values().begin() + static_cast<std::ptrdiff_t>(i) * n * n,
                  y.values().begin() + static_cast<std::ptrdiff_t>(i + 1) * n * n, img.values.begin());
        out.push_back(std::move(img));
    }
    return out;
}

Image reconstruct(nn::Model<float>& model, const Sinogram& sino, const AngularWindow& w)
{
    const Sinogram* s = &sino;
    return reconstruct_batch(model, std::span<const Sinogram* const>(&s, 1), std::span<const AngularWindow>(&w, 1))
        .front();
}

double train_step(nn::Model<float>& model, nn::Adam<float>& opt, std::span<const StepInput> batch)
{
    if (batch.empty())
        throw UsageError("empty training batch");
    const nn::ModelConfig& c = model.config();
    const int nb = static_cast<int>(batch.size());
    const int n = c.output_size;
    const std::size_t per = static_cast<std::size_t>(c.input_channels()) * c.input_rows * c.input_cols;
    auto x = nn::Tensor<float>::zeros({nb, c.input_channels(), c.input_rows, c.input_cols});
    auto target = nn::Tensor<float>::zeros({nb, 1, n, n});
    std::vector<double> alphas(batch.size());
    for (int i = 0; i < nb; ++i) {
        const StepInput& s = batch[i];
        if (s.image->size != n)
            throw ShapeError("image size " + std::to_string(s.image->size) + " does not match model output " +
                             std::to_string(n));
        prepare_input_into(*s.sino, s.window, c, x.data().data() + i * per);
        std::copy(s.image->values.begin(), s.image->values.end(),
                  target.values().begin() + static_cast<std::ptrdiff_t>(i) * n * n);
        alphas[i] = s.window.alpha_deg;
    }
    model.set_training(true);
    auto loss = nn::mse_loss(nn::rotate_bilinear(model.forward(x), alphas), target);
    const double value = loss.item();
    if (!std::isfinite(value))
        throw NumericError("training loss became non-finite");
    loss.backward();
    opt.step();
    opt.zero_grad();
    return value;
}

// ------------------------------------------------------------ evaluation

double eval_alpha(std::uint64_t seed, int sample_id, double range_deg, double step_deg)
{
    const auto key = static_cast<std::uint64_t>(std::llround(range_deg * 1000.0));
    Rng rng(derive_seed(seed ^ mix_seed(key), kEvalRole, static_cast<std::uint64_t>(sample_id)));
    const int starts = static_cast<int>(std::lround((360.0 - range_deg) / step_deg));
    return step_deg * uniform_int(rng, 0, starts);
}

RangeScore evaluate_range(const BatchReconstructor& recon, const EvalSet& set, double range_deg, int level)
{
    if (!set.data || set.indices.empty())
        throw UsageError("empty evaluation set");
    const double step = set.data->geometry.angle_step_deg;
    std::vector<AngularWindow> windows;
    for (int id : set.indices) {
        AngularWindow w;
        w.alpha_deg = eval_alpha(set.seed, id, range_deg, step);
        w.beta_deg = w.alpha_deg + range_deg;
        windows.push_back(w);
    }
    const std::vector<Image> preds = recon(set.indices, windows);
    if (preds.size() != set.indices.size())
        throw UsageError("reconstructor returned the wrong number of images");

    RangeScore rs{level ? level : level_of_range(range_deg), range_deg, 0, 0, 0, 0, {}};
    rs.samples.resize(set.indices.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (int i = 0; i < static_cast<int>(set.indices.size()); ++i) {
        const int id = set.indices[i];
        const Image& gt = set.data->images[id];
        const Image& p = preds[i];
        const double range = metrics::data_range_of(gt);
        rs.samples[i] = {id,
                         rs.level,
                         range_deg,
                         windows[i].alpha_deg,
                         metrics::mcc(metrics::threshold_mean(p), metrics::threshold_mean(gt)),
                         metrics::psnr(p, gt, range),
                         metrics::ssim(p, gt, range)};
    }
    for (const auto& s : rs.samples) {
        rs.mcc_sum += s.mcc;
        rs.psnr_mean += s.psnr_db;
        rs.ssim_mean += s.ssim;
    }
    const double count = static_cast<double>(rs.samples.size());
    rs.mcc_mean = rs.mcc_sum / count;
    rs.psnr_mean /= count;
    rs.ssim_mean /= count;
    return rs;
}

std::vector<RangeScore> evaluate_levels(const BatchReconstructor& recon, const EvalSet& set,
                                        std::span<const int> levels)
{
    std::vector<RangeScore> out;
    for (int level : levels)
        out.push_back(evaluate_range(recon, set, level_range_deg(level), level));
    return out;
}

BatchReconstructor batched(const Reconstructor& single, const EvalSet& set)
{
    return [single, data = set.data](std::span<const int> ids, std::span<const AngularWindow> windows) {
        std::vector<Image> out(ids.size());
        std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
        for (int i = 0; i < static_cast<int>(ids.size()); ++i) {
            try {
                out[i] = single(ids[i], data->sinograms[ids[i]], windows[i]);
            } catch (...) {
#pragma omp critical(lact_batched_recon)
                if (!failure)
                    failure = std::current_exception();
            }
        }
        if (failure)
            std::rethrow_exception(failure);
        return out;
    };
}

BatchReconstructor model_reconstructor(nn::Model<float>& model, const EvalSet& set, int batch_size)
{
    return [&model, data = set.data, batch_size](std::span<const int> ids, std::span<const AngularWindow> windows) {
        std::vector<Image> out;
        for (std::size_t b = 0; b < ids.size(); b += static_cast<std::size_t>(batch_size)) {
            const std::size_t e = std::min(ids.size(), b + static_cast<std::size_t>(batch_size));
            std::vector<const Sinogram*> sinos;
            for (std::size_t i = b; i < e; ++i)
                sinos.push_back(&data->sinograms[ids[i]]);
            auto part = reconstruct_batch(model, sinos, windows.subspan(b, e - b));
            for (auto& img : part)
                out.push_back(std::move(img));
        }
        return out;
    };
}

BatchReconstructor fbp_reconstructor(const EvalSet& set)
{
    return batched(
        [geom = set.data->geometry](int, const Sinogram& full, const AngularWindow& w) {
            return fbp::fbp_reconstruct(extract_window(full, w), geom);
        },
        set);
}

BatchReconstructor perfect_reconstructor(const EvalSet& set)
{
    return batched([data = set.data](int id, const Sinogram&, const AngularWindow&) { return data->images[id]; },
                   set);
}

// ------------------------------------------------------------ training loop

nn::Model<float> make_model(const TrainConfig& config)
{
    return nn::Model<float>(config.model, derive_seed(config.seed, kInitRole, 0));
}

TrainResult train(const TrainConfig& config, const Dataset& data, nn::Model<float>& model, const TrainOutputs& out)
{
    config.validate();
    if (data.size() == 0)
        throw DataError("dataset is empty");
    if (data.geometry.num_detectors != config.model.input_cols ||
        data.geometry.image_size != config.model.output_size)
        throw ShapeError("dataset geometry (" + std::to_string(data.geometry.num_detectors) + " cells, " +
                         std::to_string(data.geometry.image_size) + " px) does not match the model config");

    const Split split = split_dataset(data.size(), config.holdout_count, config.train_limit);
    nn::AdamOptions ao;
    ao.lr = config.lr;
    nn::Adam<float> opt(model.parameters(), ao);

    std::ofstream log;
    if (!out.log_csv.empty()) {
        log.open(out.log_csv);
        if (!log)
            throw DataError("cannot write " + out.log_csv.string());
        log << "epoch,step,loss,lr,wall_ms\n";
    }
    std::ofstream eval_log;
    if (!out.eval_csv.empty() && config.eval_every > 0) {
        eval_log.open(out.eval_csv);
        if (!eval_log)
            throw DataError("cannot write " + out.eval_csv.string());
        eval_log << "epoch,level,range_deg,mcc_sum,psnr_mean,ssim_mean\n";
    }

    const int per_epoch =
        static_cast<int>((split.train.size() + static_cast<std::size_t>(config.batch_size) - 1) / config.batch_size);
    const std::int64_t total = config.max_steps > 0 ? config.max_steps
                                                    : static_cast<std::int64_t>(per_epoch) * config.epochs;
    const double step_deg = data.geometry.angle_step_deg;
    const auto t0 = std::chrono::steady_clock::now();

    TrainResult result;
    double window_sum = 0.0;
    int window_count = 0;
    for (int epoch = 0; result.steps < total; ++epoch) {
        std::vector<int> order = split.train;
        Rng shuffle(derive_seed(config.seed, kShuffleRole, static_cast<std::uint64_t>(epoch)));
        std::shuffle(order.begin(), order.end(), shuffle);

        double epoch_sum = 0.0;
        int epoch_steps = 0;
        for (std::size_t b = 0; b < order.size() && result.steps < total;
             b += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t e = std::min(order.size(), b + static_cast<std::size_t>(config.batch_size));
            Rng wrng(derive_seed(config.seed, kWindowRole, static_cast<std::uint64_t>(result.steps)));
            std::vector<StepInput> batch;
            for (std::size_t i = b; i < e; ++i)
                batch.push_back({&data.images[order[i]], &data.sinograms[order[i]],
                                 sample_window(config, wrng, step_deg)});
            const double loss = train_step(model, opt, batch);
            ++result.steps;
            epoch_sum += loss;
            ++epoch_steps;
            window_sum += loss;
            ++window_count;
            result.final_loss = loss;
            if (log.is_open() && (result.steps % config.log_every == 0 || result.steps == total)) {
                const double ms =
                    std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
                log << epoch << ',' << result.steps << ',' << format_double(window_sum / window_count) << ','
                    << format_double(config.lr) << ',' << static_cast<long long>(ms) << '\n';
                window_sum = 0.0;
                window_count = 0;
            }
        }
        const double mean = epoch_steps ? epoch_sum / epoch_steps : 0.0;
        result.epoch_losses.push_back(mean);
        if (out.progress) {
            const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            out.progress("epoch " + std::to_string(epoch + 1) + " loss " + format_double(mean) + " steps " +
                         std::to_string(result.steps) + " elapsed " + std::to_string(static_cast<long long>(s)) +
                         " s");
        }
        if (eval_log.is_open() && (epoch + 1) % config.eval_every == 0 && !split.holdout.empty()) {
            EvalSet set{&data, split.holdout, config.seed};
            const auto scores = evaluate_levels(model_reconstructor(model, set), set, config.eval_levels);
            for (const auto& s : scores)
                eval_log << epoch + 1 << ',' << s.level << ',' << format_double(s.range_deg) << ','
                         << format_double(s.mcc_sum) << ',' << format_double(s.psnr_mean) << ','
                         << format_double(s.ssim_mean) << '\n';
            eval_log.flush();
        }
        if (!out.checkpoint.empty())
            nn::save_checkpoint(out.checkpoint, model, &opt);
        if (epoch_steps == 0)
            break;
    }
    if (!out.checkpoint.empty())
        nn::save_checkpoint(out.checkpoint, model, &opt);
    return result;
}

// ------------------------------------------------------------ reports

void write_eval_csv(const std::filesystem::path& path, std::span<const RangeScore> scores)
{
    std::ostringstream os;
    os << "level,range_deg,mcc_sum,psnr_mean,ssim_mean\n";
    for (const auto& s : scores)
        os << s.level << ',' << format_double(s.range_deg) << ',' << format_double(s.mcc_sum) << ','
           << format_double(s.psnr_mean) << ',' << format_double(s.ssim_mean) << '\n';
    const std::string text = os.str();
    io::write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void write_metrics_csv(const std::filesystem::path& path, std::span<const RangeScore> scores)
{
    std::ostringstream os;
    os << "sample_id,level,range_deg,mcc,psnr_db,ssim\n";
    for (const auto& s : scores)
        for (const auto& p : s.samples)
            os << p.sample_id << ',' << p.level << ',' << format_double(p.range_deg) << ',' << format_double(p.mcc)
               << ',' << format_double(p.psnr_db) << ',' << format_double(p.ssim) << '\n';
    const std::string text = os.str();
    io::write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

} // namespace lact::train
