#include "lact/io.hpp"

#include "lact/errors.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace lact::io {

namespace fs = std::filesystem;

void ByteWriter::magic(std::string_view four)
{
    buf_.insert(buf_.end(), four.begin(), four.end());
}

void ByteWriter::u32(std::uint32_t v)
{
    for (int i = 0; i < 4; ++i)
        buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::u64(std::uint64_t v)
{
    for (int i = 0; i < 8; ++i)
        buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::f32(float v)
{
    u32(std::bit_cast<std::uint32_t>(v));
}

void ByteWriter::f64(double v)
{
    u64(std::bit_cast<std::uint64_t>(v));
}

void ByteWriter::f32s(std::span<const float> v)
{
    buf_.reserve(buf_.size() + 4 * v.size());
    for (float x : v)
        f32(x);
}

void ByteWriter::bytes(std::string_view s)
{
    buf_.insert(buf_.end(), s.begin(), s.end());
}

void ByteReader::need(std::size_t n)
{
    if (remaining() < n) {
        std::ostringstream msg;
        msg << what_ << " truncated: needed " << n << " bytes at offset " << pos_ << ", " << remaining()
            << " left";
        throw TruncatedError(msg.str());
    }
}

void ByteReader::expect_magic(std::string_view four)
{
    need(four.size());
    std::string found(reinterpret_cast<const char*>(data_.data() + pos_), four.size());
    if (found != four)
        throw MagicError(std::string(four), found);
    pos_ += four.size();
}

std::uint32_t ByteReader::u32()
{
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
}

std::uint64_t ByteReader::u64()
{
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
}

float ByteReader::f32()
{
    return std::bit_cast<float>(u32());
}

double ByteReader::f64()
{
    return std::bit_cast<double>(u64());
}

void ByteReader::f32s(std::span<float> out)
{
    need(4 * out.size());
    for (float& v : out)
        v = f32();
}

std::string ByteReader::bytes(std::size_t n)
{
    need(n);
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return s;
}

std::vector<std::uint8_t> read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const fs::path& path, std::span<const std::uint8_t> bytes)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw DataError("cannot write " + tmp.string());
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out)
            throw DataError("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

namespace {

void check_version(std::uint32_t found, std::uint32_t expected, const char* what)
{
    if (found != expected)
        throw VersionError(std::string(what) + " version " + std::to_string(found) + " unsupported (expected " +
                           std::to_string(expected) + ")");
}

void check_count(std::uint64_t count, std::size_t remaining, const char* what)
{
    if (count * 4 > remaining)
        throw TruncatedError(std::string(what) + " truncated: payload needs " + std::to_string(count * 4) +
                             " bytes, " + std::to_string(remaining) + " left");
}

FanBeamGeometry read_sinogram_header(ByteReader& r)
{
    r.expect_magic("LASG");
    check_version(r.u32(), kSinogramVersion, "LASG");
    FanBeamGeometry g;
    g.num_angles = static_cast<int>(r.u32());
    g.num_detectors = static_cast<int>(r.u32());
    g.angle_start_deg = r.f64();
    g.angle_step_deg = r.f64();
    g.source_to_center = r.f64();
    g.center_to_detector = r.f64();
    g.detector_pixel_size = r.f64();
    g.image_size = static_cast<int>(r.u32());
    g.image_pixel_size = r.f64();
    if (g.num_angles <= 0 || g.num_detectors <= 0 || g.image_size <= 0)
        throw DataError("LASG header has non-positive dimensions");
    return g;
}

void finish_payload(const ByteReader& r, std::span<const float> values, const char* what)
{
    if (r.remaining() != 0)
        throw DataError(std::string(what) + " has " + std::to_string(r.remaining()) + " trailing bytes");
    for (float v : values)
        if (!std::isfinite(v))
            throw DataError(std::string(what) + " payload contains non-finite values");
}

} // namespace

std::vector<std::uint8_t> encode_image(const Image& image)
{
    ByteWriter w;
    w.magic("LAIM");
    w.u32(kImageVersion);
    w.u32(static_cast<std::uint32_t>(image.size));
    w.f32s(image.values);
    return w.data();
}

Image decode_image(std::span<const std::uint8_t> bytes)
{
    ByteReader r(bytes, "LAIM");
    r.expect_magic("LAIM");
    check_version(r.u32(), kImageVersion, "LAIM");
    const std::uint32_t size = r.u32();
    if (size == 0)
        throw DataError("LAIM image size is zero");
    const std::uint64_t count = static_cast<std::uint64_t>(size) * size;
    check_count(count, r.remaining(), "LAIM");
    Image img(static_cast<int>(size));
    r.f32s(img.values);
    finish_payload(r, img.values, "LAIM");
    return img;
}

std::vector<std::uint8_t> encode_sinogram(const Sinogram& sino)
{
    const FanBeamGeometry& g = sino.geometry;
    ByteWriter w;
    w.magic("LASG");
    w.u32(kSinogramVersion);
    w.u32(static_cast<std::uint32_t>(g.num_angles));
    w.u32(static_cast<std::uint32_t>(g.num_detectors));
    w.f64(g.angle_start_deg);
    w.f64(g.angle_step_deg);
    w.f64(g.source_to_center);
    w.f64(g.center_to_detector);
    w.f64(g.detector_pixel_size);
    w.u32(static_cast<std::uint32_t>(g.image_size));
    w.f64(g.image_pixel_size);
    w.f32s(sino.values);
    return w.data();
}

Sinogram decode_sinogram(std::span<const std::uint8_t> bytes)
{
    ByteReader r(bytes, "LASG");
    FanBeamGeometry g = read_sinogram_header(r);
    check_count(static_cast<std::uint64_t>(g.num_angles) * static_cast<std::uint64_t>(g.num_detectors),
                r.remaining(), "LASG");
    Sinogram s(g);
    r.f32s(s.values);
    finish_payload(r, s.values, "LASG");
    return s;
}

void write_image(const fs::path& path, const Image& image)
{
    write_file_atomic(path, encode_image(image));
}

Image read_image(const fs::path& path)
{
    return decode_image(read_file(path));
}

void write_sinogram(const fs::path& path, const Sinogram& sino)
{
    write_file_atomic(path, encode_sinogram(sino));
}

Sinogram read_sinogram(const fs::path& path)
{
    return decode_sinogram(read_file(path));
}

Sinogram read_sinogram(const fs::path& path, const FanBeamGeometry& expected)
{
    Sinogram s = read_sinogram(path);
    FanBeamGeometry want = expected.with_angles(s.geometry.angle_start_deg, s.geometry.angle_step_deg,
                                                s.geometry.num_angles);
    if (!(s.geometry == want))
        throw GeometryError("sinogram geometry in " + path.string() + " does not match the pipeline geometry");
    return s;
}

FanBeamGeometry probe_sinogram(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open " + path.string());
    std::vector<std::uint8_t> head(72);
    in.read(reinterpret_cast<char*>(head.data()), static_cast<std::streamsize>(head.size()));
    head.resize(static_cast<std::size_t>(in.gcount()));
    ByteReader r(head, "LASG");
    return read_sinogram_header(r);
}

namespace {

void png_append(png_structp png, png_bytep data, png_size_t len)
{
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + len);
}

void png_flush_noop(png_structp) {}

std::vector<std::uint8_t> encode_png8(int size, const std::vector<std::uint8_t>& pixels)
{
    std::vector<std::uint8_t> out;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw DataError("libpng initialization failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw DataError("PNG encoding failed");
    }
    png_set_write_fn(png, &out, png_append, png_flush_noop);
    png_set_IHDR(png, info, static_cast<png_uint_32>(size), static_cast<png_uint_32>(size), 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int r = 0; r < size; ++r)
        png_write_row(png, const_cast<png_bytep>(pixels.data() + static_cast<std::size_t>(r) * size));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

} // namespace

std::vector<std::uint8_t> encode_view(const Image& image, ViewMode mode, ValueWindow window)
{
    if (!(window.hi > window.lo))
        throw UsageError("view window must satisfy lo < hi");
    const double maxcode = mode == ViewMode::pgm16 ? 65535.0 : 255.0;
    auto code = [&](float v) {
        const double t = std::clamp((static_cast<double>(v) - window.lo) / (window.hi - window.lo), 0.0, 1.0);
        return static_cast<std::uint32_t>(std::lround(t * maxcode));
    };

    if (mode == ViewMode::pgm16) {
        std::string header = "P5\n" + std::to_string(image.size) + " " + std::to_string(image.size) + "\n65535\n";
        std::vector<std::uint8_t> out(header.begin(), header.end());
        out.reserve(out.size() + 2 * image.values.size());
        for (float v : image.values) {
            const std::uint32_t c = code(v);
            out.push_back(static_cast<std::uint8_t>(c >> 8));   // PGM samples are big-endian
            out.push_back(static_cast<std::uint8_t>(c & 0xff));
        }
        return out;
    }
    std::vector<std::uint8_t> pixels(image.values.size());
    std::transform(image.values.begin(), image.values.end(), pixels.begin(),
                   [&](float v) { return static_cast<std::uint8_t>(code(v)); });
    return encode_png8(image.size, pixels);
}

void export_view(const Image& image, const fs::path& path, ViewMode mode, ValueWindow window)
{
    write_file_atomic(path, encode_view(image, mode, window));
}

ViewMode view_mode_from_path(const fs::path& path)
{
    const std::string ext = path.extension().string();
    if (ext == ".pgm")
        return ViewMode::pgm16;
    if (ext == ".png")
        return ViewMode::png8;
    throw UsageError("unsupported view extension '" + ext + "' (use .pgm or .png)");
}

} // namespace lact::io
