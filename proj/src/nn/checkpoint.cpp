#include "lact/nn/checkpoint.hpp"

#include "lact/errors.hpp"
#include "lact/io.hpp"

#include <map>

namespace lact::nn {

using io::ByteReader;
using io::ByteWriter;
using io::read_file;
using io::write_file_atomic;

namespace {

constexpr std::uint32_t kMaxRank = 8;

void write_array(ByteWriter& w, const std::string& name, const Shape& shape, std::span<const float> values)
{
    w.u32(static_cast<std::uint32_t>(name.size()));
    w.bytes(name);
    w.u32(static_cast<std::uint32_t>(shape.size()));
    for (int d : shape)
        w.u32(static_cast<std::uint32_t>(d));
    w.f32s(values);
}

NamedArray read_array(ByteReader& r)
{
    NamedArray a;
    const std::uint32_t len = r.u32();
    if (len > r.remaining())
        throw TruncatedError("checkpoint tensor name runs past the end of the file");
    a.name = r.bytes(len);
    const std::uint32_t rank = r.u32();
    if (rank == 0 || rank > kMaxRank)
        throw DataError("checkpoint tensor '" + a.name + "' has unsupported rank " + std::to_string(rank));
    std::uint64_t count = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
        const std::uint32_t d = r.u32();
        if (d == 0 || d > (1u << 30))
            throw DataError("checkpoint tensor '" + a.name + "' has invalid dimension " + std::to_string(d));
        a.shape.push_back(static_cast<int>(d));
        count *= d;
        if (count * 4 > r.remaining())
            throw TruncatedError("checkpoint tensor '" + a.name + "' runs past the end of the file");
    }
    a.values.resize(static_cast<std::size_t>(count));
    r.f32s(a.values);
    return a;
}

std::vector<std::pair<std::string, std::vector<float>>> as_pairs(const std::vector<NamedArray>& list)
{
    std::vector<std::pair<std::string, std::vector<float>>> out;
    for (const auto& a : list)
        out.emplace_back(a.name, a.values);
    return out;
}

} // namespace

Checkpoint make_checkpoint(const Model<float>& model, const Adam<float>* optimizer)
{
    Checkpoint c;
    c.config = model.config();
    for (const auto& [name, t] : model.state())
        c.tensors.push_back({name, t.shape(), t.values()});
    if (optimizer) {
        Checkpoint::Optimizer o;
        const auto st = optimizer->state();
        o.step = st.step;
        std::map<std::string, Shape> shapes;
        for (const auto& [name, t] : optimizer->params())
            shapes[name] = t.shape();
        for (const auto& [name, v] : st.m)
            o.m.push_back({name, shapes[name], v});
        for (const auto& [name, v] : st.v)
            o.v.push_back({name, shapes[name], v});
        c.optimizer = std::move(o);
    }
    return c;
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt)
{
    ByteWriter w;
    w.magic("LACK");
    w.u32(Checkpoint::kVersion);
    const std::string cfg = to_json(ckpt.config).dump();
    w.u32(static_cast<std::uint32_t>(cfg.size()));
    w.bytes(cfg);
    w.u32(static_cast<std::uint32_t>(ckpt.tensors.size()));
    for (const auto& a : ckpt.tensors)
        write_array(w, a.name, a.shape, a.values);
    w.u32(ckpt.optimizer ? 1 : 0);
    if (ckpt.optimizer) {
        const auto& o = *ckpt.optimizer;
        w.u64(o.step);
        w.u32(static_cast<std::uint32_t>(o.m.size() + o.v.size()));
        for (const auto& a : o.m)
            write_array(w, "adam.m." + a.name, a.shape, a.values);
        for (const auto& a : o.v)
            write_array(w, "adam.v." + a.name, a.shape, a.values);
    }
    return w.data();
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes)
{
    ByteReader r(bytes, "checkpoint");
    r.expect_magic("LACK");
    const std::uint32_t version = r.u32();
    if (version != Checkpoint::kVersion)
        throw VersionError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                           std::to_string(Checkpoint::kVersion) + ")");
    Checkpoint c;
    const std::uint32_t cfg_len = r.u32();
    if (cfg_len > r.remaining())
        throw TruncatedError("checkpoint config block runs past the end of the file");
    const std::string cfg = r.bytes(cfg_len);
    try {
        c.config = model_config_from_json(Json::parse(cfg));
        c.config.validate();
    } catch (const Json::exception& e) {
        throw DataError(std::string("checkpoint config is not valid JSON: ") + e.what());
    } catch (const UsageError& e) {
        throw DataError(std::string("checkpoint config is invalid: ") + e.what());
    }
    const std::uint32_t count = r.u32();
    for (std::uint32_t i = 0; i < count; ++i)
        c.tensors.push_back(read_array(r));
    const std::uint32_t has_opt = r.u32();
    if (has_opt > 1)
        throw DataError("checkpoint optimizer flag is corrupt");
    if (has_opt) {
        Checkpoint::Optimizer o;
        o.step = r.u64();
        const std::uint32_t n = r.u32();
        for (std::uint32_t i = 0; i < n; ++i) {
            NamedArray a = read_array(r);
            if (a.name.rfind("adam.m.", 0) == 0) {
                a.name.erase(0, 7);
                o.m.push_back(std::move(a));
            } else if (a.name.rfind("adam.v.", 0) == 0) {
                a.name.erase(0, 7);
                o.v.push_back(std::move(a));
            } else {
                throw DataError("unexpected optimizer tensor '" + a.name + "'");
            }
        }
        c.optimizer = std::move(o);
    }
    if (r.remaining() != 0)
        throw DataError("checkpoint has " + std::to_string(r.remaining()) + " trailing bytes");
    return c;
}

void save_checkpoint(const std::filesystem::path& path, const Model<float>& model, const Adam<float>* optimizer)
{
    write_file_atomic(path, encode_checkpoint(make_checkpoint(model, optimizer)));
}

Checkpoint load_checkpoint(const std::filesystem::path& path)
{
    return decode_checkpoint(read_file(path));
}

Model<float> restore_model(const Checkpoint& ckpt)
{
    Model<float> model(ckpt.config, 0);
    // Shapes are checked by name against the freshly built model.
    std::map<std::string, Shape> expected;
    for (const auto& [name, t] : model.state())
        expected[name] = t.shape();
    for (const auto& a : ckpt.tensors) {
        auto it = expected.find(a.name);
        if (it != expected.end() && it->second != a.shape)
            throw ShapeError("checkpoint tensor '" + a.name + "' has shape " + to_string(a.shape) + ", expected " +
                             to_string(it->second));
    }
    model.load_state(as_pairs(ckpt.tensors));
    return model;
}

void restore_optimizer(const Checkpoint& ckpt, Adam<float>& opt)
{
    if (!ckpt.optimizer)
        return;
    Adam<float>::State s;
    s.step = ckpt.optimizer->step;
    s.m = as_pairs(ckpt.optimizer->m);
    s.v = as_pairs(ckpt.optimizer->v);
    opt.load_state(s);
}

} // namespace lact::nn
