#include "lact/cli.hpp"

#include "lact/errors.hpp"
#include "lact/fbp.hpp"
#include "lact/io.hpp"
#include "lact/json_io.hpp"
#include "lact/metrics.hpp"
#include "lact/nn/checkpoint.hpp"
#include "lact/parallel.hpp"
#include "lact/phantom.hpp"
#include "lact/projector.hpp"
#include "lact/sweeps.hpp"
#include "lact/training.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <ostream>
#include <sstream>

namespace lact::cli {

namespace fs = std::filesystem;

AngularWindow parse_range(const std::string& text)
{
    const auto colon = text.find(':');
    if (colon == std::string::npos || text.find(':', colon + 1) != std::string::npos)
        throw UsageError("range must look like A:B, got '" + text + "'");
    auto number = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (s.empty() || used != s.size() || !std::isfinite(v))
            throw UsageError("range must look like A:B, got '" + text + "'");
        return v;
    };
    AngularWindow w;
    w.alpha_deg = number(text.substr(0, colon));
    w.beta_deg = number(text.substr(colon + 1));
    if (!(w.beta_deg > w.alpha_deg))
        throw UsageError("range end must exceed its start, got '" + text + "'");
    return w;
}

std::vector<int> parse_levels(const std::string& text)
{
    auto integer = [&](const std::string& s) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (s.empty() || used != s.size() || v < 1 || v > 7)
            throw UsageError("levels must be numbers in 1..7, got '" + text + "'");
        return v;
    };
    std::vector<int> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        const auto dots = part.find("..");
        if (dots == std::string::npos) {
            out.push_back(integer(part));
            continue;
        }
        const int a = integer(part.substr(0, dots)), b = integer(part.substr(dots + 2));
        if (a > b)
            throw UsageError("level range '" + part + "' is decreasing");
        for (int l = a; l <= b; ++l)
            out.push_back(l);
    }
    if (out.empty())
        throw UsageError("no levels given");
    return out;
}

namespace {

std::vector<int> parse_ints(const std::string& text, const char* what)
{
    std::vector<int> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(part, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (part.empty() || used != part.size())
            throw UsageError(std::string(what) + " must be a comma-separated list of integers");
        out.push_back(v);
    }
    if (out.empty())
        throw UsageError(std::string(what) + " is empty");
    return out;
}

void write_output_image(const Image& img, const fs::path& path)
{
    const auto ext = path.extension().string();
    if (ext == ".pgm" || ext == ".png") {
        const auto [lo, hi] = std::minmax_element(img.values.begin(), img.values.end());
        io::ValueWindow w{*lo, *hi > *lo ? *hi : *lo + 1.0};
        io::export_view(img, path, io::view_mode_from_path(path), w);
    } else {
        io::write_image(path, img);
    }
}

void ensure_parent(const fs::path& path)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
}

struct Common {
    int threads = 0;
    bool print_config = false;
};

void apply_threads(const Common& c)
{
    int n = c.threads;
    if (n <= 0)
        if (const char* env = std::getenv("LACT_THREADS")) {
            char* end = nullptr;
            const long v = std::strtol(env, &end, 10);
            if (end == env || *end != '\0' || v < 1)
                throw UsageError("LACT_THREADS must be a positive integer");
            n = static_cast<int>(v);
        }
    parallel::set_num_threads(n);
}

// Resolved configuration echoed at the start of every run; --print-config stops there.
bool announce(const Json& resolved, const Common& c, std::ostream& out, std::ostream& err)
{
    if (c.print_config) {
        out << resolved.dump(2) << '\n';
        return true;
    }
    err << "config: " << resolved.dump() << '\n';
    return false;
}

void add_common(CLI::App* cmd, Common& c)
{
    cmd->add_option("--threads", c.threads, "Worker threads (falls back to LACT_THREADS)")->check(CLI::NonNegativeNumber);
    cmd->add_flag("--print-config", c.print_config, "Print the resolved configuration and exit");
}

// ------------------------------------------------------------ generate

struct GenerateArgs {
    Common common;
    std::string manifest, out, preset = "desk_small";
    std::optional<std::uint64_t> seed;
    std::optional<int> count;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out, std::ostream& err)
{
    phantom::DatasetManifest m;
    if (!a.manifest.empty()) {
        m = manifest_from_json(read_json_file(a.manifest));
    } else {
        Json j{{"preset", a.preset}};
        m = manifest_from_json(j);
    }
    if (a.seed)
        m.master_seed = *a.seed;
    if (a.count)
        m.count = *a.count;
    m.validate();
    if (announce(to_json(m), a.common, out, err))
        return kOk;
    err << "seed: " << m.master_seed << '\n';
    fs::create_directories(a.out);
    phantom::generate_dataset(m, a.out);
    out << "wrote " << m.count << " samples to " << a.out << '\n';
    return kOk;
}

// ------------------------------------------------------------ fbp

struct FbpArgs {
    Common common;
    std::string sino, range, filter = "hann", out;
    double cutoff = 1.0;
};

int cmd_fbp(const FbpArgs& a, std::ostream& out, std::ostream& err)
{
    const AngularWindow w = parse_range(a.range);
    fbp::FilterSpec f;
    f.kind = fbp::filter_kind_from_string(a.filter);
    f.cutoff = a.cutoff;
    f.validate();
    const Json resolved{{"sino", a.sino}, {"range", {w.alpha_deg, w.beta_deg}}, {"filter", a.filter},
                        {"cutoff", a.cutoff}, {"out", a.out}};
    if (announce(resolved, a.common, out, err))
        return kOk;
    const Sinogram full = io::read_sinogram(a.sino);
    // FBP accepts any part of the scan, not only the 30 to 90 degree windows.
    if (!(w.alpha_deg >= 0.0 && w.beta_deg > w.alpha_deg && w.beta_deg <= 360.0))
        throw UsageError("fbp range must satisfy 0 <= A < B <= 360");
    const Image img = fbp::fbp_reconstruct(slice_angles(full, w.alpha_deg, w.beta_deg), full.geometry, f);
    ensure_parent(a.out);
    write_output_image(img, a.out);
    out << "wrote " << a.out << '\n';
    return kOk;
}

// ------------------------------------------------------------ train

struct TrainArgs {
    Common common;
    std::string config, out, dataset, log, eval_csv;
    std::optional<int> epochs, batch_size, eval_every, holdout, train_limit;
    std::optional<double> lr, fixed_range;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> max_steps;
    bool uniform = false;
};

train::TrainConfig resolve_train(const TrainArgs& a)
{
    train::TrainConfig c;
    if (!a.config.empty())
        c = train::train_config_from_json(read_json_file(a.config));
    if (!a.dataset.empty())
        c.dataset = a.dataset;
    if (a.epochs)
        c.epochs = *a.epochs;
    if (a.batch_size)
        c.batch_size = *a.batch_size;
    if (a.eval_every)
        c.eval_every = *a.eval_every;
    if (a.holdout)
        c.holdout_count = *a.holdout;
    if (a.train_limit)
        c.train_limit = *a.train_limit;
    if (a.lr)
        c.lr = *a.lr;
    if (a.fixed_range)
        c.fixed_range = *a.fixed_range;
    if (a.seed)
        c.seed = *a.seed;
    if (a.max_steps)
        c.max_steps = *a.max_steps;
    if (a.uniform)
        c.uniform_range_mode = true;
    if (c.dataset.empty())
        throw UsageError("train needs a dataset (config field or --dataset)");
    c.validate();
    return c;
}

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err)
{
    const train::TrainConfig c = resolve_train(a);
    if (announce(to_json(c), a.common, out, err))
        return kOk;
    err << "seed: " << c.seed << '\n';
    const train::Dataset data = train::Dataset::load(c.dataset);
    nn::Model<float> model = train::make_model(c);
    train::TrainOutputs o;
    o.checkpoint = a.out;
    o.log_csv = a.log;
    o.eval_csv = a.eval_csv;
    o.progress = [&err](const std::string& s) { err << s << '\n'; };
    ensure_parent(a.out);
    if (!a.log.empty())
        ensure_parent(a.log);
    if (!a.eval_csv.empty())
        ensure_parent(a.eval_csv);
    const auto r = train::train(c, data, model, o);
    out << "trained " << r.steps << " steps, final loss " << r.final_loss << ", checkpoint " << a.out << '\n';
    return kOk;
}

// ------------------------------------------------------------ reconstruct

struct ReconstructArgs {
    Common common;
    std::string ckpt, sino, range, out;
};

int cmd_reconstruct(const ReconstructArgs& a, std::ostream& out, std::ostream& err)
{
    const AngularWindow w = parse_range(a.range);
    const Json resolved{{"ckpt", a.ckpt}, {"sino", a.sino}, {"range", {w.alpha_deg, w.beta_deg}}, {"out", a.out}};
    if (announce(resolved, a.common, out, err))
        return kOk;
    const nn::Checkpoint ck = nn::load_checkpoint(a.ckpt);
    nn::Model<float> model = nn::restore_model(ck);
    const Sinogram full = io::read_sinogram(a.sino);
    const Image img = train::reconstruct(model, full, w);
    ensure_parent(a.out);
    write_output_image(img, a.out);
    out << "wrote " << a.out << " (" << img.size << "x" << img.size << ")\n";
    return kOk;
}

// ------------------------------------------------------------ eval

struct EvalArgs {
    Common common;
    std::string pred, gt, levels = "1..7", out, metrics, data, ckpt;
    bool fbp = false;
    int holdout = -1;
    std::uint64_t seed = 0;
};

std::vector<int> sample_ids(const fs::path& dir)
{
    std::vector<int> ids;
    for (const auto& e : fs::directory_iterator(dir)) {
        const std::string name = e.path().filename().string();
        int id = 0;
        char tail = 0;
        if (name.size() == 18 && std::sscanf(name.c_str(), "sample_%6d.lai%c", &id, &tail) == 2 && tail == 'm')
            ids.push_back(id);
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

// Per-level prediction "sample_%06d_level%d.laim", falling back to "sample_%06d.laim".
Image read_prediction(const fs::path& dir, int id, int level)
{
    char name[64];
    std::snprintf(name, sizeof name, "sample_%06d_level%d.laim", id, level);
    if (fs::exists(dir / name))
        return io::read_image(dir / name);
    return io::read_image(dir / phantom::sample_name(id, "laim"));
}

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err)
{
    const std::vector<int> levels = parse_levels(a.levels);
    const bool files = !a.pred.empty() || !a.gt.empty();
    const bool model = !a.data.empty();
    if (files == model || (files && (a.pred.empty() || a.gt.empty())))
        throw UsageError("eval needs either --pred and --gt, or --data with --ckpt or --fbp");
    if (model && (a.ckpt.empty() == !a.fbp))
        throw UsageError("eval --data needs exactly one of --ckpt and --fbp");
    const Json resolved{{"pred", a.pred}, {"gt", a.gt}, {"data", a.data}, {"ckpt", a.ckpt}, {"fbp", a.fbp},
                        {"levels", levels}, {"holdout", a.holdout}, {"seed", a.seed}, {"out", a.out},
                        {"metrics", a.metrics}};
    if (announce(resolved, a.common, out, err))
        return kOk;

    std::vector<train::RangeScore> scores;
    if (files) {
        const std::vector<int> ids = sample_ids(a.gt);
        if (ids.empty())
            throw DataError("no sample_*.laim files in " + a.gt);
        for (int level : levels) {
            train::RangeScore rs{level, level_range_deg(level), 0, 0, 0, 0, {}};
            for (int id : ids) {
                const Image gt = io::read_image(fs::path(a.gt) / phantom::sample_name(id, "laim"));
                const Image p = read_prediction(a.pred, id, level);
                if (p.size != gt.size)
                    throw ShapeError("prediction and ground truth of sample " + std::to_string(id) +
                                     " differ in size");
                const double range = metrics::data_range_of(gt);
                rs.samples.push_back({id, level, rs.range_deg, 0.0,
                                      metrics::mcc(metrics::threshold_mean(p), metrics::threshold_mean(gt)),
                                      metrics::psnr(p, gt, range), metrics::ssim(p, gt, range)});
            }
            for (const auto& s : rs.samples) {
                rs.mcc_sum += s.mcc;
                rs.psnr_mean += s.psnr_db;
                rs.ssim_mean += s.ssim;
            }
            const double n = static_cast<double>(rs.samples.size());
            rs.mcc_mean = rs.mcc_sum / n;
            rs.psnr_mean /= n;
            rs.ssim_mean /= n;
            scores.push_back(std::move(rs));
        }
    } else {
        const train::Dataset data = train::Dataset::load(a.data);
        const train::Split split = train::split_dataset(data.size(), a.holdout, 0);
        const train::EvalSet set{&data, split.holdout, a.seed};
        if (a.fbp) {
            scores = train::evaluate_levels(train::fbp_reconstructor(set), set, levels);
        } else {
            nn::Model<float> m = nn::restore_model(nn::load_checkpoint(a.ckpt));
            scores = train::evaluate_levels(train::model_reconstructor(m, set), set, levels);
        }
    }
    for (const auto& s : scores)
        out << "level " << s.level << " (" << s.range_deg << " deg): mcc_sum " << s.mcc_sum << ", psnr "
            << s.psnr_mean << ", ssim " << s.ssim_mean << '\n';
    if (!a.out.empty()) {
        ensure_parent(a.out);
        train::write_eval_csv(a.out, scores);
    }
    if (!a.metrics.empty()) {
        ensure_parent(a.metrics);
        train::write_metrics_csv(a.metrics, scores);
    }
    return kOk;
}

// ------------------------------------------------------------ sweep

struct SweepArgs {
    Common common;
    std::string kind, data, ckpt, out, config, levels = "1..7", offsets = "0,2,4,6,8,10", counts = "0,1,2,3,4",
                                                sizes = "250,500,1000,2000";
    bool fbp = false;
    int holdout = -1;
    std::uint64_t seed = 0;
    double range = 40.0, lo = 30.0, hi = 90.0, step = 0.5;
    std::int64_t steps = 2000;
};

int cmd_sweep(const SweepArgs& a, std::ostream& out, std::ostream& err)
{
    Json resolved{{"kind", a.kind}, {"data", a.data}, {"out", a.out}, {"holdout", a.holdout}, {"seed", a.seed}};
    if (a.kind == "datasize") {
        if (a.config.empty())
            throw UsageError("datasize sweep needs --config");
        resolved["config"] = a.config;
        resolved["sizes"] = parse_ints(a.sizes, "--sizes");
        resolved["steps"] = a.steps;
    } else {
        if (a.ckpt.empty() == !a.fbp)
            throw UsageError("sweep needs exactly one of --ckpt and --fbp");
        resolved["ckpt"] = a.ckpt;
        resolved["fbp"] = a.fbp;
        if (a.kind == "angular")
            resolved["lo"] = a.lo, resolved["hi"] = a.hi, resolved["step"] = a.step;
        else if (a.kind == "level")
            resolved["levels"] = parse_levels(a.levels);
        else if (a.kind == "position")
            resolved["offsets"] = parse_ints(a.offsets, "--offsets"), resolved["range"] = a.range;
        else if (a.kind == "crosses")
            resolved["counts"] = parse_ints(a.counts, "--counts"), resolved["range"] = a.range;
    }
    if (announce(resolved, a.common, out, err))
        return kOk;

    const train::Dataset data = train::Dataset::load(a.data);
    std::vector<sweep::SweepRow> rows;
    if (a.kind == "datasize") {
        train::TrainConfig c = train::train_config_from_json(read_json_file(a.config));
        c.holdout_count = a.holdout;
        const auto sizes = parse_ints(a.sizes, "--sizes");
        rows = sweep::datasize_sweep(c, data, sizes, a.steps, [&err](const std::string& s) { err << s << '\n'; });
    } else {
        std::optional<nn::Model<float>> model;
        if (!a.fbp)
            model.emplace(nn::restore_model(nn::load_checkpoint(a.ckpt)));
        const sweep::ReconstructorFactory make = [&](const train::EvalSet& set) {
            return a.fbp ? train::fbp_reconstructor(set) : train::model_reconstructor(*model, set);
        };
        const train::Split split = train::split_dataset(data.size(), a.holdout, 0);
        const train::EvalSet set{&data, split.holdout, a.seed};
        if (a.kind == "angular") {
            rows = sweep::angular_sweep(make(set), set, a.lo, a.hi, a.step);
        } else if (a.kind == "level") {
            rows = sweep::level_sweep(make(set), set, parse_levels(a.levels));
        } else if (a.kind == "position") {
            rows = sweep::position_sweep(make, data, split.holdout, parse_ints(a.offsets, "--offsets"), a.range,
                                         a.seed);
        } else {
            rows = sweep::crosses_sweep(make, data, split.holdout, parse_ints(a.counts, "--counts"), a.range,
                                        a.seed);
        }
    }
    ensure_parent(a.out);
    sweep::write_sweep_csv(a.out, rows);
    out << "wrote " << rows.size() << " rows to " << a.out << '\n';
    return kOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Limited-angle fan-beam CT toolkit", "lact"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "Generate a synthetic phantom/sinogram dataset");
    add_common(g, gen.common);
    g->add_option("--manifest", gen.manifest, "Dataset manifest JSON")->check(CLI::ExistingFile);
    g->add_option("--preset", gen.preset, "Manifest preset when no file is given")
        ->check(CLI::IsMember({"desk", "desk_small"}));
    g->add_option("--out", gen.out, "Output directory")->required();
    g->add_option("--seed", gen.seed, "Master seed");
    g->add_option("--count", gen.count, "Number of samples")->check(CLI::PositiveNumber);

    FbpArgs fb;
    auto* f = app.add_subcommand("fbp", "Filtered back projection of a sinogram window");
    add_common(f, fb.common);
    f->add_option("--sino", fb.sino, "Input sinogram (.lasg)")->required();
    f->add_option("--range", fb.range, "Angular window A:B in degrees")->required();
    f->add_option("--filter", fb.filter, "ramlak or hann");
    f->add_option("--cutoff", fb.cutoff, "Filter cutoff as a fraction of Nyquist");
    f->add_option("--out", fb.out, "Output image (.laim, .pgm or .png)")->required();

    TrainArgs tr;
    auto* t = app.add_subcommand("train", "Train a reconstruction network");
    add_common(t, tr.common);
    t->add_option("--config", tr.config, "Training config JSON")->check(CLI::ExistingFile);
    t->add_option("--out", tr.out, "Checkpoint path")->required();
    t->add_option("--dataset", tr.dataset, "Dataset directory");
    t->add_option("--epochs", tr.epochs, "Passes over the training split");
    t->add_option("--batch-size", tr.batch_size, "Samples per update");
    t->add_option("--lr", tr.lr, "Adam learning rate");
    t->add_option("--seed", tr.seed, "Seed for init, batching and ranges");
    t->add_option("--fixed-range", tr.fixed_range, "Train on a single angular range");
    t->add_flag("--uniform-ranges", tr.uniform, "Ranges uniform over [30, 90] at 0.5 degree steps");
    t->add_option("--holdout", tr.holdout, "Held-out samples at the end of the dataset");
    t->add_option("--train-limit", tr.train_limit, "Use only this many training samples");
    t->add_option("--max-steps", tr.max_steps, "Stop after this many updates");
    t->add_option("--eval-every", tr.eval_every, "Evaluate the held-out split every N epochs");
    t->add_option("--log", tr.log, "Training log CSV");
    t->add_option("--eval-csv", tr.eval_csv, "Evaluation CSV");

    ReconstructArgs rc;
    auto* r = app.add_subcommand("reconstruct", "Reconstruct a sinogram window with a trained network");
    add_common(r, rc.common);
    r->add_option("--ckpt", rc.ckpt, "Checkpoint")->required();
    r->add_option("--sino", rc.sino, "Input sinogram (.lasg)")->required();
    r->add_option("--range", rc.range, "Angular window A:B in degrees")->required();
    r->add_option("--out", rc.out, "Output image (.laim, .pgm or .png)")->required();

    EvalArgs ev;
    auto* e = app.add_subcommand("eval", "Score reconstructions per level");
    add_common(e, ev.common);
    e->add_option("--pred", ev.pred, "Directory of predictions");
    e->add_option("--gt", ev.gt, "Directory of ground-truth images");
    e->add_option("--data", ev.data, "Dataset directory (scores its held-out split)");
    e->add_option("--ckpt", ev.ckpt, "Checkpoint to evaluate with --data");
    e->add_flag("--fbp", ev.fbp, "Evaluate FBP with --data");
    e->add_option("--holdout", ev.holdout, "Held-out samples at the end of the dataset");
    e->add_option("--seed", ev.seed, "Seed of the evaluation start angles");
    e->add_option("--levels", ev.levels, "Levels, e.g. 1..7 or 1,3,7");
    e->add_option("--out", ev.out, "Per-level CSV");
    e->add_option("--metrics", ev.metrics, "Per-sample CSV");

    SweepArgs sw;
    auto* s = app.add_subcommand("sweep", "Ablation sweeps");
    add_common(s, sw.common);
    s->add_option("--kind", sw.kind, "angular, level, position, crosses or datasize")
        ->required()
        ->check(CLI::IsMember({"angular", "level", "position", "crosses", "datasize"}));
    s->add_option("--data", sw.data, "Dataset directory")->required();
    s->add_option("--out", sw.out, "Output CSV")->required();
    s->add_option("--ckpt", sw.ckpt, "Checkpoint");
    s->add_flag("--fbp", sw.fbp, "Sweep FBP instead of a network");
    s->add_option("--config", sw.config, "Training config for the datasize sweep");
    s->add_option("--holdout", sw.holdout, "Held-out samples at the end of the dataset");
    s->add_option("--seed", sw.seed, "Seed of the evaluation start angles");
    s->add_option("--range", sw.range, "Angular range for position and crosses sweeps");
    s->add_option("--lo", sw.lo, "First angular range (angular sweep)");
    s->add_option("--hi", sw.hi, "Last angular range (angular sweep)");
    s->add_option("--step", sw.step, "Range step in degrees (angular sweep)");
    s->add_option("--levels", sw.levels, "Levels for the level sweep");
    s->add_option("--offsets", sw.offsets, "Horizontal offsets in pixels");
    s->add_option("--counts", sw.counts, "Numbers of added crosses");
    s->add_option("--sizes", sw.sizes, "Training-set sizes");
    s->add_option("--steps", sw.steps, "Updates per datasize model");

    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& ex) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& ex) {
        err << "usage error: " << ex.what() << '\n';
        return kUsage;
    }

    try {
        const std::pair<CLI::App*, const Common*> commons[] = {{g, &gen.common}, {f, &fb.common}, {t, &tr.common},
                                                               {r, &rc.common}, {e, &ev.common}, {s, &sw.common}};
        for (const auto& [cmd, c] : commons)
            if (cmd->parsed())
                apply_threads(*c);
        if (g->parsed())
            return cmd_generate(gen, out, err);
        if (f->parsed())
            return cmd_fbp(fb, out, err);
        if (t->parsed())
            return cmd_train(tr, out, err);
        if (r->parsed())
            return cmd_reconstruct(rc, out, err);
        if (e->parsed())
            return cmd_eval(ev, out, err);
        return cmd_sweep(sw, out, err);
    } catch (const UsageError& ex) {
        err << "usage error: " << ex.what() << '\n';
        return kUsage;
    } catch (const NumericError& ex) {
        err << "numeric error: " << ex.what() << '\n';
        return kNumeric;
    } catch (const DataError& ex) {
        err << "data error: " << ex.what() << '\n';
        return kData;
    } catch (const Json::exception& ex) {
        err << "data error: " << ex.what() << '\n';
        return kData;
    } catch (const fs::filesystem_error& ex) {
        err << "data error: " << ex.what() << '\n';
        return kData;
    }
}

} // namespace lact::cli
