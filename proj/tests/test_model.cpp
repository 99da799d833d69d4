#include "support.hpp"

#include "lact/errors.hpp"
#include "lact/nn/checkpoint.hpp"
#include "lact/projector.hpp"
#include "lact/training.hpp"

#include <doctest.h>

#include <cstring>

using namespace lact;
using namespace lact::nn;

namespace {

Tensor<float> random_input(const ModelConfig& c, int batch, std::uint64_t seed)
{
    const Shape shape{batch, c.input_channels(), c.input_rows, c.input_cols};
    const auto v = test::random_values(static_cast<std::size_t>(numel(shape)), seed, 0.0, 30.0);
    return Tensor<float>::from(shape, std::vector<float>(v.begin(), v.end()));
}

struct ToySet {
    std::vector<Image> images;
    std::vector<Sinogram> sinos;
};

ToySet toy_set(int count)
{
    ToySet s;
    const auto g = FanBeamGeometry::desk_small();
    for (int i = 0; i < count; ++i) {
        const Image img = test::disk_image(g.image_size, 12.0 + 3.0 * i, 0.8f);
        s.sinos.push_back(forward_project(img, g));
        s.images.push_back(img);
    }
    return s;
}

std::vector<train::StepInput> batch_of(const ToySet& s, int step)
{
    std::vector<train::StepInput> b;
    for (std::size_t i = 0; i < s.images.size(); ++i) {
        const double a = 10.0 * ((step + static_cast<int>(i)) % 20);
        b.push_back({&s.images[i], &s.sinos[i], AngularWindow{a, a + 40.0}});
    }
    return b;
}

std::vector<float> flat_state(const Model<float>& m)
{
    std::vector<float> out;
    for (const auto& [name, t] : m.state())
        out.insert(out.end(), t.values().begin(), t.values().end());
    return out;
}

} // namespace

TEST_CASE("full-scale encoder reaches the 8x8x512 bottleneck")
{
    const ModelConfig c = ModelConfig::full_scale();
    CHECK(c.input_rows == 181);
    CHECK(c.input_cols == 560);
    Model<float> m(c, 1);
    m.set_training(false);
    NoGradGuard guard;
    const auto z = m.encode(random_input(c, 1, 2));
    CHECK(z.shape() == Shape{1, 512, 8, 8});
    const auto y = m.decode(z);
    CHECK(y.shape() == Shape{1, 1, 512, 512});
}

TEST_CASE("desk presets map sinograms to images")
{
    for (const auto& [c, out] : {std::pair{ModelConfig::desk(), 128}, std::pair{ModelConfig::desk_small(), 64}}) {
        Model<float> m(c, 3);
        m.set_training(false);
        NoGradGuard guard;
        const auto y = m.forward(random_input(c, 2, 4));
        CHECK(y.shape() == Shape{2, 1, out, out});
        CHECK(m.parameter_count() > 0);
        for (float v : y.values())
            CHECK(std::isfinite(v));
    }
    auto bad = ModelConfig::desk_small();
    bad.encoder_channels.back() = 7;
    CHECK_THROWS_AS(bad.validate(), UsageError);
    const auto round = model_config_from_json(to_json(ModelConfig::desk()));
    CHECK(to_json(round) == to_json(ModelConfig::desk()));
}

TEST_CASE("eval-mode outputs do not depend on the rest of the batch")
{
    const ModelConfig c = ModelConfig::desk_small();
    Model<float> m(c, 5);
    m.set_training(false);
    NoGradGuard guard;
    const auto x = random_input(c, 3, 6);
    const auto all = m.forward(x);
    const std::size_t in = static_cast<std::size_t>(x.numel() / 3), out = static_cast<std::size_t>(all.numel() / 3);
    for (int b = 0; b < 3; ++b) {
        const std::vector<float> one(x.values().begin() + b * in, x.values().begin() + (b + 1) * in);
        const auto y = m.forward(Tensor<float>::from({1, c.input_channels(), c.input_rows, c.input_cols}, one));
        for (std::size_t i = 0; i < out; ++i)
            CHECK(y.values()[i] == doctest::Approx(all.values()[b * out + i]).epsilon(1e-5));
    }

    Model<float> same(c, 5), other(c, 6);
    CHECK(flat_state(same) == flat_state(m));
    CHECK(flat_state(other) != flat_state(m));
}

TEST_CASE("residual block with a zero projection is the identity")
{
    Rng rng(7);
    const auto block = make_residual_block<double>(4, 2, 5, 0.0, rng);
    const auto x = Tensor<double>::from({2, 4, 6, 6}, test::random_values(288, 8));
    CHECK(block(x).values() == x.values());
    const auto live = make_residual_block<double>(4, 2, 5, 0.1, rng);
    CHECK(live(x).values() != x.values());
}

TEST_CASE("adam")
{
    auto w = Tensor<double>::from({4}, {1.0, -2.0, 3.0, 0.5}, true);
    NamedTensors<double> params{{"w", w}};
    AdamOptions o;
    o.lr = 0.01;
    Adam<double> opt(params, o);

    const auto before = w.values();
    opt.zero_grad();
    opt.step();
    CHECK(w.values() == before);

    // Adam steps are bounded by lr.
    for (int s = 0; s < 5; ++s) {
        opt.zero_grad();
        w.mutable_grad() = {0.3, -5.0, 1e-3, 0.0};
        const auto prev = w.values();
        opt.step();
        for (std::size_t i = 0; i < 4; ++i)
            CHECK(std::abs(w.values()[i] - prev[i]) <= o.lr * (1 + 1e-9));
        CHECK(w.values()[3] == prev[3]);
    }
    CHECK(opt.step_count() == 6);

    // From a fresh state the first step moves each weight by lr * sign(g) up to eps.
    auto u = Tensor<double>::from({2}, {1.0, -2.0}, true);
    Adam<double> fresh(NamedTensors<double>{{"u", u}}, o);
    u.mutable_grad() = {0.3, -5.0};
    fresh.step();
    CHECK(u.values()[0] == doctest::Approx(1.0 - o.lr).epsilon(1e-6));
    CHECK(u.values()[1] == doctest::Approx(-2.0 + o.lr).epsilon(1e-6));

    // Independent scalar oracle of the update rule.
    double x = 1.0, m = 0.0, v = 0.0;
    auto t = Tensor<double>::from({1}, {1.0}, true);
    Adam<double> o2(NamedTensors<double>{{"t", t}}, o);
    for (int s = 1; s <= 10; ++s) {
        const double g = std::sin(s) * 2.0;
        m = 0.9 * m + 0.1 * g;
        v = 0.999 * v + 0.001 * g * g;
        x -= 0.01 * (m / (1 - std::pow(0.9, s))) / (std::sqrt(v / (1 - std::pow(0.999, s))) + 1e-8);
        o2.zero_grad();
        t.mutable_grad() = {g};
        o2.step();
        CHECK(t.item() == doctest::Approx(x).epsilon(1e-12));
    }
}

TEST_CASE("checkpoint round trip, fuzzing and exact resume")
{
    const ToySet data = toy_set(2);
    const ModelConfig c = ModelConfig::desk_small();
    AdamOptions o;
    o.lr = 1e-3;

    Model<float> straight(c, 11);
    Adam<float> opt_s(straight.parameters(), o);
    for (int s = 0; s < 4; ++s) {
        const auto b = batch_of(data, s);
        train::train_step(straight, opt_s, b);
    }

    Model<float> first(c, 11);
    Adam<float> opt_f(first.parameters(), o);
    for (int s = 0; s < 2; ++s) {
        const auto b = batch_of(data, s);
        train::train_step(first, opt_f, b);
    }
    const auto dir = test::scratch_dir("ckpt");
    save_checkpoint(dir / "a.ckpt", first, &opt_f);
    const auto bytes = encode_checkpoint(make_checkpoint(first, &opt_f));
    CHECK(encode_checkpoint(decode_checkpoint(bytes)) == bytes);

    const Checkpoint ck = load_checkpoint(dir / "a.ckpt");
    CHECK(to_json(ck.config) == to_json(c));
    REQUIRE(ck.optimizer.has_value());
    CHECK(ck.optimizer->step == 2);
    Model<float> resumed = restore_model(ck);
    CHECK(flat_state(resumed) == flat_state(first));
    Adam<float> opt_r(resumed.parameters(), o);
    restore_optimizer(ck, opt_r);
    for (int s = 2; s < 4; ++s) {
        const auto b = batch_of(data, s);
        train::train_step(resumed, opt_r, b);
    }
    const auto a = flat_state(resumed), e = flat_state(straight);
    REQUIRE(a.size() == e.size());
    CHECK(std::memcmp(a.data(), e.data(), a.size() * sizeof(float)) == 0);

    // Model-only checkpoints carry no optimizer block.
    CHECK_FALSE(decode_checkpoint(encode_checkpoint(make_checkpoint(first, nullptr))).optimizer.has_value());

    Rng rng(12);
    int rejected = 0;
    for (int t = 0; t < 400; ++t) {
        auto b = bytes;
        const int kind = uniform_int(rng, 0, 2);
        if (kind == 0)
            b[static_cast<std::size_t>(uniform_int(rng, 0, std::min<int>(255, static_cast<int>(b.size()) - 1)))] ^=
                static_cast<std::uint8_t>(uniform_int(rng, 1, 255));
        else if (kind == 1)
            b.resize(static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(b.size()) - 1)));
        else
            b.push_back(0);
        try {
            decode_checkpoint(b);
        } catch (const lact::Error&) {
            ++rejected;
        }
    }
    CHECK(rejected > 200);
}
